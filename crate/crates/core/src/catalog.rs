//! Named built-in measurements and the reference success probabilities they
//! are expected to reproduce.

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::povm::{noisy_mu_pair, qubit_dichotomic, qubit_effect, random_povm, Povm, QubitDichotomicParams};

/// `M_k(±1) = (𝟙 ± σ_k)/2`.
pub fn pauli_measurement(k: usize) -> Result<Povm> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidParams(format!("Pauli index must be 1, 2 or 3, got {k}")));
    }
    let mut a = [0.0; 3];
    a[k - 1] = 1.0;
    qubit_dichotomic(QubitDichotomicParams::unbiased(a)?)
}

/// Three-outcome qubit measurement along coplanar directions 120° apart.
pub fn trine() -> Povm {
    let h = 3f64.sqrt() / 2.0;
    let dirs = [[1.0, 0.0, 0.0], [-0.5, h, 0.0], [-0.5, -h, 0.0]];
    Povm::new(dirs.iter().map(|&a| qubit_effect(1.0, a, 1.0 / 3.0)).collect())
        .expect("trine effects share one dimension")
}

/// Four-outcome symmetric informationally complete qubit measurement.
pub fn qubit_sic() -> Povm {
    let s = 1.0 / 3f64.sqrt();
    let signs = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    Povm::new(
        signs
            .iter()
            .map(|v| qubit_effect(1.0, v.map(|x| x * s), 0.25))
            .collect(),
    )
    .expect("SIC effects share one dimension")
}

/// Dichotomic qutrit pair: projector onto the first two basis vectors, and
/// the projector onto the uniform superposition.
pub fn qutrit_e3_pair() -> (Povm, Povm) {
    let m1 = HermitianOperator::diagonal(&[1.0, 1.0, 0.0]);
    let n1 = HermitianOperator::from_real_rows(&vec![vec![1.0 / 3.0; 3]; 3]).expect("real symmetric");
    let id = HermitianOperator::identity(3);
    let m = Povm::new(vec![m1.clone(), &id - &m1]).expect("qutrit effects");
    let n = Povm::new(vec![n1.clone(), &id - &n1]).expect("qutrit effects");
    (m, n)
}

#[derive(Debug, Clone)]
pub enum Builtin {
    Single(Povm),
    Pair(Povm, Povm),
}

pub const BUILTIN_NAMES: [&str; 8] = [
    "pauli-x",
    "pauli-y",
    "pauli-z",
    "trine",
    "qubit-sic",
    "qutrit-e3",
    "mu:d=<d>,mu=<mu>,nu=<nu>",
    "random:d=<d>,n=<outcomes>",
];

/// Resolves a built-in name. `qutrit-e3` and `mu:...` name pairs.
pub fn builtin(name: &str) -> Result<Builtin> {
    builtin_seeded(name, 0)
}

/// Like [`builtin`]; `seed` drives `random:...`.
pub fn builtin_seeded(name: &str, seed: u64) -> Result<Builtin> {
    Ok(match name {
        "pauli-x" => Builtin::Single(pauli_measurement(1)?),
        "pauli-y" => Builtin::Single(pauli_measurement(2)?),
        "pauli-z" => Builtin::Single(pauli_measurement(3)?),
        "trine" => Builtin::Single(trine()),
        "qubit-sic" => Builtin::Single(qubit_sic()),
        "qutrit-e3" => {
            let (m, n) = qutrit_e3_pair();
            Builtin::Pair(m, n)
        }
        other => {
            if let Some(args) = other.strip_prefix("mu:") {
                let kv = parse_args(args, &["d", "mu", "nu"])?;
                let d = parse_value::<usize>("d", kv[0])?;
                let (q, p) = noisy_mu_pair(d, parse_value("mu", kv[1])?, parse_value("nu", kv[2])?)?;
                Builtin::Pair(q, p)
            } else if let Some(args) = other.strip_prefix("random:") {
                let kv = parse_args(args, &["d", "n"])?;
                Builtin::Single(random_povm(parse_value("d", kv[0])?, parse_value("n", kv[1])?, seed)?)
            } else {
                return Err(Error::Parse(format!("unknown built-in measurement '{other}'")));
            }
        }
    })
}

/// Splits `k1=v1,k2=v2,...` and returns the values in the order of `keys`;
/// every key is required exactly once.
fn parse_args<'a>(args: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let mut values = vec![None; keys.len()];
    for part in args.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value in '{part}'")))?;
        let slot = keys
            .iter()
            .position(|k| *k == key.trim())
            .ok_or_else(|| Error::Parse(format!("unknown parameter '{}'", key.trim())))?;
        if values[slot].replace(value.trim()).is_some() {
            return Err(Error::Parse(format!("parameter '{}' given twice", keys[slot])));
        }
    }
    values
        .into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| Error::Parse(format!("missing parameter '{k}'"))))
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: '{value}'")))
}

/// A reference value for the optimal success probability of a pair.
#[derive(Debug, Clone)]
pub struct GoldenExample {
    pub name: &'static str,
    pub first: Povm,
    pub second: Povm,
    pub expected: f64,
    /// Precision of the quoted value.
    pub tolerance: f64,
}

pub fn golden_examples() -> Vec<GoldenExample> {
    let p = |k| pauli_measurement(k).expect("valid Pauli index");
    let (m, n) = qutrit_e3_pair();
    let mut out = vec![
        GoldenExample {
            name: "pauli-x vs trine",
            first: p(1),
            second: trine(),
            expected: 0.695,
            tolerance: 1e-3,
        },
        GoldenExample {
            name: "pauli-y vs trine",
            first: p(2),
            second: trine(),
            expected: 0.696,
            tolerance: 1e-3,
        },
        GoldenExample {
            name: "pauli-z vs trine",
            first: p(3),
            second: trine(),
            expected: 0.717,
            tolerance: 1e-3,
        },
    ];
    for (k, name) in [
        (1, "pauli-x vs qubit-sic"),
        (2, "pauli-y vs qubit-sic"),
        (3, "pauli-z vs qubit-sic"),
    ] {
        out.push(GoldenExample {
            name,
            first: p(k),
            second: qubit_sic(),
            expected: 0.6465,
            tolerance: 5e-4,
        });
    }
    out.push(GoldenExample {
        name: "qutrit-e3",
        first: m,
        second: n,
        expected: 0.9013,
        tolerance: 5e-4,
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qrac::optimal_success;

    #[test]
    fn builtins_are_valid() {
        for name in [
            "pauli-x",
            "pauli-y",
            "pauli-z",
            "trine",
            "qubit-sic",
            "qutrit-e3",
            "mu:d=3,mu=0.7,nu=0.7",
        ] {
            match builtin(name).unwrap() {
                Builtin::Single(p) => assert!(p.validate().unwrap().is_valid(), "{name}"),
                Builtin::Pair(a, b) => {
                    assert!(a.validate().unwrap().is_valid(), "{name}");
                    assert!(b.validate().unwrap().is_valid(), "{name}");
                }
            }
        }
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(builtin("nope"), Err(Error::Parse(_))));
        assert!(matches!(builtin("mu:d=3,mu=0.5"), Err(Error::Parse(_))));
        assert!(matches!(builtin("mu:d=3,mu=x,nu=0.5"), Err(Error::Parse(_))));
        assert!(matches!(
            builtin("mu:d=3,mu=1.5,nu=0.5"),
            Err(Error::NoiseOutOfRange(_))
        ));
        assert!(matches!(builtin("mu:d=3,mu=0.5,nu=0.5,nu=0.1"), Err(Error::Parse(_))));
        assert!(matches!(builtin("random:d=2"), Err(Error::Parse(_))));
        assert!(pauli_measurement(4).is_err());
    }

    #[test]
    fn random_builtin_follows_seed() {
        let get = |seed| match builtin_seeded("random:d=2,n=3", seed).unwrap() {
            Builtin::Single(p) => p,
            Builtin::Pair(..) => unreachable!(),
        };
        assert_eq!(get(4), get(4));
        assert_ne!(get(4), get(5));
        assert_eq!(get(4).outcomes(), 3);
    }

    #[test]
    fn golden_values_reproduce() {
        let g = golden_examples();
        assert_eq!(g.len(), 7);
        for e in &g {
            let p = optimal_success(&e.first, &e.second).unwrap().p_bar;
            assert!((p - e.expected).abs() <= e.tolerance, "{}: {p}", e.name);
        }
    }

    #[test]
    fn sic_directions_are_tetrahedral() {
        let sic = qubit_sic();
        for (i, a) in sic.effects().iter().enumerate() {
            assert!((a.trace() - 0.5).abs() < 1e-15);
            for b in &sic.effects()[i + 1..] {
                // tr[(𝟙+a·σ)(𝟙+b·σ)]/16 = (2 + 2a·b)/16 with a·b = −1/3
                assert!((a.trace_product(b) - (2.0 - 2.0 / 3.0) / 16.0).abs() < 1e-15);
            }
        }
    }
}
