//! Parsers for the compact command-line specs.

use cvtomo::statesim::{cat_density, cat_pure, random_density, DensityMatrix};
use cvtomo::{BasisSpec, Error, Result, C64};
use nalgebra::DMatrix;

/// `"2+0i,-2+0i"` → amplitudes. A bare real like `1.5` is accepted.
pub fn complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<C64>().map_err(|_| Error::Config(format!("cannot parse complex amplitude {t:?}"))))
        .collect()
}

/// `fock:M`, `cat` / `coherent`, or `displaced-fock:M`; the cat kinds take
/// their centres from `alphas`.
pub fn basis(spec: &str, alphas: Option<&str>) -> Result<BasisSpec> {
    let (kind, arg) = spec.split_once(':').map_or((spec, None), |(k, a)| (k, Some(a)));
    let cutoff = |a: Option<&str>| -> Result<usize> {
        a.ok_or_else(|| Error::Config(format!("basis {kind:?} needs a cutoff, e.g. {kind}:3")))?
            .parse()
            .map_err(|_| Error::Config(format!("bad cutoff in basis spec {spec:?}")))
    };
    let centres = || -> Result<Vec<C64>> {
        let a = alphas.ok_or_else(|| Error::Config(format!("basis {kind:?} needs --alphas")))?;
        let v = complex_list(a)?;
        if v.is_empty() {
            return Err(Error::Config("--alphas is empty".into()));
        }
        Ok(v)
    };
    match kind {
        "fock" => Ok(BasisSpec::fock(cutoff(arg)?)),
        "cat" | "coherent" => BasisSpec::coherent(centres()?),
        "displaced-fock" => BasisSpec::displaced_fock(centres()?, cutoff(arg)?),
        _ => Err(Error::Config(format!("unknown basis {spec:?} (fock:M, cat, displaced-fock:M)"))),
    }
}

/// `a:b:step` → inclusive grid.
pub fn range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad range {s:?}, expected start:stop:step"))))
        .collect::<Result<_>>()?;
    let [a, b, h] = parts[..] else {
        return Err(Error::Config(format!("bad range {s:?}, expected start:stop:step")));
    };
    if !(h > 0.0) || b < a {
        return Err(Error::Config(format!("range {s:?} needs start ≤ stop and a positive step")));
    }
    Ok(cvtomo::design::linspace_step(a, b, h))
}

/// True state from a spec:
/// - `random:M[:knob[:seed]]` — random Fock-basis state,
/// - `fock:N[:M]` — number state `|N⟩` in a cutoff-`M` basis (default `N`),
/// - `cat` / `cat-mixed` — equal superposition / mixture over `alphas`
///   (`amplitudes` overrides the superposition weights),
/// - `file:PATH` — a density-matrix JSON.
pub fn state(spec: &str, alphas: Option<&str>, amplitudes: Option<&str>) -> Result<DensityMatrix> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize, what: &str| -> Result<Option<f64>> {
        parts
            .get(i)
            .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("bad {what} in state spec {spec:?}"))))
            .transpose()
    };
    match parts[0] {
        "random" => {
            let m = num(1, "cutoff")?.ok_or_else(|| Error::Config("random state needs a cutoff: random:M".into()))?;
            random_density(m as usize, num(2, "purity knob")?.unwrap_or(0.5), num(3, "seed")?.unwrap_or(0.0) as u64)
        }
        "fock" => {
            let n = num(1, "number")?.ok_or_else(|| Error::Config("fock state needs a number: fock:N".into()))? as usize;
            let m = num(2, "cutoff")?.map_or(n, |m| m as usize);
            if n > m {
                return Err(Error::Config(format!("|{n}⟩ does not fit under cutoff {m}")));
            }
            let mut e = DMatrix::zeros(m + 1, m + 1);
            e[(n, n)] = C64::new(1.0, 0.0);
            Ok(DensityMatrix::fock(e))
        }
        "cat" | "cat-mixed" => {
            let a = complex_list(alphas.ok_or_else(|| Error::Config("cat states need --alphas".into()))?)?;
            if parts[0] == "cat-mixed" {
                return cat_density(&a, &DMatrix::identity(a.len(), a.len()));
            }
            let amps = match amplitudes {
                Some(s) => complex_list(s)?,
                None => vec![C64::new(1.0, 0.0); a.len()],
            };
            if amps.len() != a.len() {
                return Err(Error::Config(format!("{} amplitudes for {} centres", amps.len(), a.len())));
            }
            cat_pure(&a, &amps)
        }
        "file" => {
            let path = spec.strip_prefix("file:").unwrap_or_default();
            let rho: DensityMatrix = cvtomo::io::read_json(std::path::Path::new(path))?;
            rho.validate(1e-8)?;
            Ok(rho)
        }
        _ => Err(Error::Config(format!("unknown state spec {spec:?} (random:M, fock:N, cat, cat-mixed, file:PATH)"))),
    }
}

pub fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Config(format!("bad {what} {t:?}"))))
        .collect()
}

/// Shot totals accept scientific notation (`1e6`).
pub fn totals(s: &str) -> Result<Vec<u64>> {
    list::<f64>(s, "shot total")?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 && x < 1.8e19 {
                Ok(x as u64)
            } else {
                Err(Error::Config(format!("shot total {x} is not a positive integer")))
            }
        })
        .collect()
}
