//! Small dense helpers for support reduction.

/// A nonzero `z` with `A z = 0`, if the columns of `A` are dependent.
pub(crate) fn null_vector(a: &[Vec<f64>], ncols: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let eps = 1e-12 * scale;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let (best, mag) = (row..m.len())
            .map(|r| (r, m[r][col].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= eps {
            continue;
        }
        m.swap(row, best);
        let p = m[row][col];
        m[row].iter_mut().for_each(|v| *v /= p);
        for r in 0..m.len() {
            if r != row && m[r][col] != 0.0 {
                let factor = m[r][col];
                let pivot_row = m[row].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..ncols).find(|c| !pivots.contains(c))?;
    let mut z = vec![0.0; ncols];
    z[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        z[pc] = -m[r][free];
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_dependency() {
        let a = vec![vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0]];
        let z = null_vector(&a, 3).unwrap();
        for row in &a {
            let dot: f64 = row.iter().zip(&z).map(|(x, y)| x * y).sum();
            assert!(dot.abs() < 1e-12);
        }
        assert!(null_vector(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).is_none());
    }
}
