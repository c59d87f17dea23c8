//! Dense joint probability tables with named axes.

use std::fmt;

use serde::Serialize;

use super::alphabet::{unflatten, Alphabet};
use super::dist::{CondKernel, ProbDist};
use super::info::entropy_of;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One axis of a joint table: a role label and the alphabet it ranges over.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub role: String,
    pub alphabet: Alphabet,
}

impl Axis {
    pub fn new(role: impl Into<String>, alphabet: Alphabet) -> Self {
        Axis {
            role: role.into(),
            alphabet,
        }
    }
}

/// Row-major probability tensor over an ordered list of axes (the last axis
/// varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable<T> {
    axes: Vec<Axis>,
    mass: Vec<T>,
}

impl<T: Real> JointTable<T> {
    pub fn new(axes: Vec<Axis>, mass: Vec<T>) -> Result<Self> {
        let size: usize = axes.iter().map(|a| a.alphabet.size()).product();
        if size != mass.len() {
            return Err(Error::Dimension(format!(
                "joint over {} cells given {} masses",
                size,
                mass.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.role == a.role) {
                return Err(Error::Domain(format!("duplicate axis `{}`", a.role)));
            }
        }
        let mut total = T::zero();
        for &p in &mass {
            if !(p >= T::zero()) {
                return Err(Error::InvalidDistribution(format!("negative cell {p}")));
            }
            total += p;
        }
        if (total - T::one()).abs() > T::joint_tol() {
            return Err(Error::InvalidDistribution(format!(
                "joint mass sums to {total}"
            )));
        }
        Ok(JointTable { axes, mass })
    }

    pub fn from_dist(role: impl Into<String>, dist: &ProbDist<T>) -> Self {
        JointTable {
            axes: vec![Axis::new(role, dist.alphabet().clone())],
            mass: dist.mass().to_vec(),
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn radices(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.alphabet.size()).collect()
    }

    pub fn roles(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.role.as_str()).collect()
    }

    pub fn total(&self) -> T {
        self.mass.iter().copied().sum()
    }

    pub fn axis(&self, role: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.role == role)
            .ok_or_else(|| Error::UnknownAxis(role.to_string()))
    }

    pub fn has_axis(&self, role: &str) -> bool {
        self.axes.iter().any(|a| a.role == role)
    }

    pub fn prob(&self, tuple: &[usize]) -> T {
        self.mass[super::alphabet::flat_index(&self.radices(), tuple)]
    }

    fn positions(&self, roles: &[&str]) -> Result<Vec<usize>> {
        roles.iter().map(|r| self.axis(r)).collect()
    }

    /// Marginal over `keep`, with axes in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointTable<T>> {
        if keep.is_empty() {
            return Err(Error::Domain("marginal over no axes".into()));
        }
        let pos = self.positions(keep)?;
        for (i, p) in pos.iter().enumerate() {
            if pos[..i].contains(p) {
                return Err(Error::Domain(format!("axis `{}` listed twice", keep[i])));
            }
        }
        let mass = self.marginal_mass(&pos);
        Ok(JointTable {
            axes: pos.iter().map(|&p| self.axes[p].clone()).collect(),
            mass,
        })
    }

    /// Sums out the axes in `drop`; remaining axes keep their order.
    pub fn marginalize(&self, drop: &[&str]) -> Result<JointTable<T>> {
        let dropped = self.positions(drop)?;
        let keep: Vec<&str> = self
            .axes
            .iter()
            .enumerate()
            .filter(|(i, _)| !dropped.contains(i))
            .map(|(_, a)| a.role.as_str())
            .collect();
        if keep.is_empty() {
            return Err(Error::Domain("cannot marginalize out every axis".into()));
        }
        self.marginal(&keep)
    }

    fn marginal_mass(&self, pos: &[usize]) -> Vec<T> {
        let radices = self.radices();
        let sub: Vec<usize> = pos.iter().map(|&p| radices[p]).collect();
        let size: usize = sub.iter().product();
        let mut out = vec![T::zero(); size];
        let mut tuple = vec![0; radices.len()];
        for (i, &p) in self.mass.iter().enumerate() {
            if p == T::zero() {
                continue;
            }
            unflatten(&radices, i, &mut tuple);
            let j = pos.iter().fold(0, |acc, &k| acc * radices[k] + tuple[k]);
            out[j] += p;
        }
        out
    }

    /// Joint entropy of the listed axes in bits; zero for an empty list.
    pub fn entropy(&self, of: &[&str]) -> Result<T> {
        if of.is_empty() {
            return Ok(T::zero());
        }
        let pos = self.positions(of)?;
        Ok(entropy_of(&self.marginal_mass(&pos)))
    }

    /// `I(X;Y|Z)` in bits for disjoint axis sets; `given` may be empty.
    pub fn conditional_mutual_information(
        &self,
        x: &[&str],
        y: &[&str],
        given: &[&str],
    ) -> Result<T> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::Domain("mutual information needs two nonempty sets".into()));
        }
        let all: Vec<&str> = x.iter().chain(y).chain(given).copied().collect();
        let pos = self.positions(&all)?;
        for (i, p) in pos.iter().enumerate() {
            if pos[..i].contains(p) {
                return Err(Error::Domain(format!("axis `{}` is not disjoint", all[i])));
            }
        }
        let xz: Vec<&str> = x.iter().chain(given).copied().collect();
        let yz: Vec<&str> = y.iter().chain(given).copied().collect();
        let value = self.entropy(&xz)? + self.entropy(&yz)?
            - self.entropy(&all)?
            - self.entropy(given)?;
        Ok(value.max(T::zero()))
    }

    pub fn mutual_information(&self, x: &[&str], y: &[&str]) -> Result<T> {
        self.conditional_mutual_information(x, y, &[])
    }

    /// Expectation of a function of the listed axes.
    pub fn expectation<F>(&self, of: &[&str], mut f: F) -> Result<T>
    where
        F: FnMut(&[usize]) -> T,
    {
        let pos = self.positions(of)?;
        let radices = self.radices();
        let sub: Vec<usize> = pos.iter().map(|&p| radices[p]).collect();
        let marg = self.marginal_mass(&pos);
        let mut tuple = vec![0; sub.len()];
        let mut acc = T::zero();
        for (j, &p) in marg.iter().enumerate() {
            if p > T::zero() {
                unflatten(&sub, j, &mut tuple);
                acc += p * f(&tuple);
            }
        }
        Ok(acc)
    }
}

impl<T: Real> fmt::Display for JointTable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({})", self.roles().join(","))
    }
}

type MapFn = Box<dyn Fn(&[usize]) -> usize + Send + Sync>;

/// One term of a chain-rule product.
pub enum Factor<T> {
    /// Unconditional distribution of a new axis.
    Dist { role: String, dist: ProbDist<T> },
    /// Kernel producing one or more new axes (jointly, row-major) from
    /// earlier axes.
    Kernel {
        outputs: Vec<Axis>,
        given: Vec<String>,
        kernel: CondKernel<T>,
    },
    /// Deterministic map: contributes the indicator `1{role = map(given)}`.
    Map {
        role: String,
        alphabet: Alphabet,
        given: Vec<String>,
        map: MapFn,
    },
}

impl<T: Real> Factor<T> {
    pub fn dist(role: impl Into<String>, dist: ProbDist<T>) -> Self {
        Factor::Dist {
            role: role.into(),
            dist,
        }
    }

    pub fn kernel(role: impl Into<String>, given: &[&str], kernel: CondKernel<T>) -> Self {
        let out = kernel.output().clone();
        Factor::Kernel {
            outputs: vec![Axis::new(role, out)],
            given: given.iter().map(|s| s.to_string()).collect(),
            kernel,
        }
    }

    /// Kernel whose output alphabet is the row-major product of `outputs`.
    pub fn joint_kernel(outputs: Vec<Axis>, given: &[&str], kernel: CondKernel<T>) -> Self {
        Factor::Kernel {
            outputs,
            given: given.iter().map(|s| s.to_string()).collect(),
            kernel,
        }
    }

    pub fn map<F>(role: impl Into<String>, alphabet: Alphabet, given: &[&str], map: F) -> Self
    where
        F: Fn(&[usize]) -> usize + Send + Sync + 'static,
    {
        Factor::Map {
            role: role.into(),
            alphabet,
            given: given.iter().map(|s| s.to_string()).collect(),
            map: Box::new(map),
        }
    }
}

/// Multiplies the factors in order into a joint table. Each factor may only
/// condition on axes introduced by earlier factors.
pub fn compose<T: Real>(factors: Vec<Factor<T>>) -> Result<JointTable<T>> {
    let mut axes: Vec<Axis> = Vec::new();
    let mut mass = vec![T::one()];

    let locate = |axes: &[Axis], given: &[String]| -> Result<Vec<usize>> {
        given
            .iter()
            .map(|g| {
                axes.iter()
                    .position(|a| &a.role == g)
                    .ok_or_else(|| Error::DanglingAxis(g.clone()))
            })
            .collect()
    };

    for factor in factors {
        let radices: Vec<usize> = axes.iter().map(|a| a.alphabet.size()).collect();
        let mut tuple = vec![0; radices.len()];
        let (new_axes, next) = match factor {
            Factor::Dist { role, dist } => {
                let n = dist.len();
                let mut next = Vec::with_capacity(mass.len() * n);
                for &m in &mass {
                    next.extend(dist.mass().iter().map(|&p| m * p));
                }
                (vec![Axis::new(role, dist.alphabet().clone())], next)
            }
            Factor::Kernel {
                outputs,
                given,
                kernel,
            } => {
                let pos = locate(&axes, &given)?;
                let kr = kernel.radices();
                if kr.len() != pos.len() || pos.iter().zip(&kr).any(|(&p, &r)| radices[p] != r) {
                    return Err(Error::Dimension(format!(
                        "kernel inputs do not match axes {given:?}"
                    )));
                }
                let n: usize = outputs.iter().map(|a| a.alphabet.size()).product();
                if n != kernel.output().size() {
                    return Err(Error::Dimension(format!(
                        "kernel output of size {} split into {} cells",
                        kernel.output().size(),
                        n
                    )));
                }
                let mut next = Vec::with_capacity(mass.len() * n);
                let mut sel = vec![0; pos.len()];
                for (i, &m) in mass.iter().enumerate() {
                    unflatten(&radices, i, &mut tuple);
                    for (s, &p) in sel.iter_mut().zip(&pos) {
                        *s = tuple[p];
                    }
                    next.extend(kernel.row(&sel).iter().map(|&p| m * p));
                }
                (outputs, next)
            }
            Factor::Map {
                role,
                alphabet,
                given,
                map,
            } => {
                let pos = locate(&axes, &given)?;
                let n = alphabet.size();
                let mut next = vec![T::zero(); mass.len() * n];
                let mut sel = vec![0; pos.len()];
                for (i, &m) in mass.iter().enumerate() {
                    unflatten(&radices, i, &mut tuple);
                    for (s, &p) in sel.iter_mut().zip(&pos) {
                        *s = tuple[p];
                    }
                    let out = map(&sel);
                    if out >= n {
                        return Err(Error::Dimension(format!(
                            "map for `{role}` returned {out} outside alphabet of size {n}"
                        )));
                    }
                    next[i * n + out] = m;
                }
                (vec![Axis::new(role, alphabet)], next)
            }
        };
        for a in &new_axes {
            if axes.iter().any(|b| b.role == a.role) {
                return Err(Error::Domain(format!("axis `{}` introduced twice", a.role)));
            }
        }
        axes.extend(new_axes);
        mass = next;
    }
    if axes.is_empty() {
        return Err(Error::Domain("compose needs at least one factor".into()));
    }
    JointTable::new(axes, mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(name: &str) -> Alphabet {
        Alphabet::binary(name)
    }

    fn product_xy() -> JointTable<f64> {
        compose(vec![
            Factor::dist("X", ProbDist::new(bin("X"), vec![0.3, 0.7]).unwrap()),
            Factor::dist("Y", ProbDist::new(bin("Y"), vec![0.6, 0.4]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn marginalize_product() {
        let j = product_xy();
        let same = j.marginalize(&[]).unwrap();
        assert_eq!(same, j);
        let x = j.marginalize(&["Y"]).unwrap();
        assert_eq!(x.roles(), vec!["X"]);
        assert!((x.mass()[0] - 0.3).abs() < 1e-15);
        assert!(j.marginalize(&["X", "Y"]).is_err());
        assert!(matches!(j.marginalize(&["Q"]), Err(Error::UnknownAxis(_))));
    }

    #[test]
    fn independence_and_copy() {
        let j = product_xy();
        assert!(j.mutual_information(&["X"], &["Y"]).unwrap().abs() < 1e-12);

        let copy = compose(vec![
            Factor::dist("X", ProbDist::<f64>::uniform(bin("X"))),
            Factor::map("Y", bin("Y"), &["X"], |t| t[0]),
            Factor::dist("Z", ProbDist::point(Alphabet::singleton("Z"), 0).unwrap()),
        ])
        .unwrap();
        let i = copy
            .conditional_mutual_information(&["X"], &["Y"], &["Z"])
            .unwrap();
        assert!((i - 1.0).abs() < 1e-12);
        assert!(copy
            .conditional_mutual_information(&["X"], &["X"], &[])
            .is_err());
    }

    #[test]
    fn single_dist_and_dangling() {
        let d = ProbDist::new(bin("S"), vec![0.1, 0.9]).unwrap();
        let j = compose(vec![Factor::dist("S", d.clone())]).unwrap();
        assert_eq!(j.mass(), d.mass());

        let k = CondKernel::<f64>::deterministic(vec![bin("A")], bin("B"), |t| t[0]).unwrap();
        let err = compose(vec![Factor::dist("S", d), Factor::kernel("B", &["A"], k)]);
        assert!(matches!(err, Err(Error::DanglingAxis(a)) if a == "A"));
    }

    #[test]
    fn indicator_rows_with_fixed_action() {
        // P(s) 1{s_e = h(s, a)} with a = 1 fixed: s_e copies s.
        let se = Alphabet::new("Se", ["*", "0", "1"]).unwrap();
        let j = compose(vec![
            Factor::dist("A", ProbDist::point(bin("A"), 1).unwrap()),
            Factor::dist("S", ProbDist::new(bin("S"), vec![0.3, 0.7]).unwrap()),
            Factor::map("Se", se, &["S", "A"], |t| if t[1] == 1 { t[0] + 1 } else { 0 }),
        ])
        .unwrap();
        for s in 0..2 {
            for e in 0..3 {
                let p = j.prob(&[1, s, e]);
                let expected = if e == s + 1 { [0.3, 0.7][s] } else { 0.0 };
                assert_eq!(p, expected);
            }
        }
    }
}
