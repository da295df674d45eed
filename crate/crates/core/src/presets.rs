//! Named equation presets and the registry exposed through the CLI.
//!
//! Base presets map to undamped equations; the `*-on-top-of(X)` wrappers
//! attach a dissipation functional to any base preset and switch the
//! damping flag on.

use crate::energy::{DissipationSpec, EnergySpec, EnergyTerm};
use crate::error::{Result, WideError};

/// A resolved preset: energy, dissipation and the damping switch.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    /// Equation realized by this preset, second-order-in-time form.
    pub equation: String,
    pub energy: EnergySpec,
    pub dissipation: DissipationSpec,
    pub kappa: bool,
}

/// Concrete instantiations exercised by `gradcheck` and the test suite.
pub const GRADCHECK_PRESETS: &[&str] = &[
    "wave",
    "klein-gordon",
    "biharmonic",
    "nlw(4)",
    "sine-gordon",
    "plaplace-wave(3,3)",
    "beam(3,3)",
    "kirchhoff",
    "fractional-wave(0.5,1,4)",
    "telegraph-on-top-of(nlw(4))",
    "telegraph-on-top-of(sine-gordon)",
    "strong-damping-on-top-of(wave)",
    "full-damping-on-top-of(klein-gordon)",
];

fn deriv(order: usize, exponent: f64, coeff: f64) -> EnergyTerm {
    EnergyTerm::DerivPower {
        order,
        exponent,
        coeff,
    }
}

/// Split `name(a,b,...)` into the bare name and raw argument list. Arguments
/// may themselves contain balanced parentheses (nested presets).
fn split_name(full: &str) -> Result<(&str, Vec<&str>)> {
    let full = full.trim();
    match full.find('(') {
        None => Ok((full, Vec::new())),
        Some(open) => {
            if !full.ends_with(')') {
                return Err(WideError::UnknownPreset(full.to_string()));
            }
            let head = &full[..open];
            let inner = &full[open + 1..full.len() - 1];
            let mut args = Vec::new();
            let mut depth = 0usize;
            let mut start = 0usize;
            for (i, c) in inner.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth = depth
                            .checked_sub(1)
                            .ok_or_else(|| WideError::UnknownPreset(full.to_string()))?;
                    }
                    ',' if depth == 0 => {
                        args.push(inner[start..i].trim());
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            if depth != 0 {
                return Err(WideError::UnknownPreset(full.to_string()));
            }
            if !inner.trim().is_empty() {
                args.push(inner[start..].trim());
            }
            Ok((head, args))
        }
    }
}

fn parse_f64(s: &str, ctx: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| {
        WideError::InvalidParameter(format!("preset {ctx}: cannot parse `{s}` as a number"))
    })
}

/// Resolve a preset name from the registry.
///
/// Registry: `wave`, `klein-gordon`, `biharmonic`, `nlw(p)`, `sine-gordon`,
/// `plaplace-wave(p,q)`, `beam(p,q)`, `kirchhoff`,
/// `fractional-wave(s,lambda,p)`, `telegraph-on-top-of(X)`,
/// `strong-damping-on-top-of(X)`, `full-damping-on-top-of(X)`.
pub fn preset(full_name: &str) -> Result<Preset> {
    let (head, args) = split_name(full_name)?;
    let arity = |n: usize| -> Result<()> {
        if args.len() != n {
            Err(WideError::InvalidParameter(format!(
                "preset {head} expects {n} argument(s), got {}",
                args.len()
            )))
        } else {
            Ok(())
        }
    };
    let base = |name: &str, equation: &str, terms: Vec<EnergyTerm>| -> Result<Preset> {
        Ok(Preset {
            name: name.to_string(),
            equation: equation.to_string(),
            energy: EnergySpec::new(terms)?,
            dissipation: DissipationSpec::empty(),
            kappa: false,
        })
    };
    match head {
        "wave" => {
            arity(0)?;
            base("wave", "w'' = Lap w", vec![deriv(1, 2.0, 1.0)])
        }
        "klein-gordon" => {
            arity(0)?;
            base(
                "klein-gordon",
                "w'' = Lap w - w",
                vec![deriv(1, 2.0, 1.0), deriv(0, 2.0, 1.0)],
            )
        }
        "biharmonic" => {
            arity(0)?;
            base("biharmonic", "w'' = -Lap^2 w", vec![deriv(2, 2.0, 1.0)])
        }
        "nlw" => {
            arity(1)?;
            let p = parse_f64(args[0], "nlw")?;
            if !(p > 2.0) {
                return Err(WideError::InvalidParameter(format!(
                    "nlw exponent must exceed 2, got {p}"
                )));
            }
            base(
                &format!("nlw({p})"),
                &format!("w'' = Lap w - |w|^{}w", p - 2.0),
                vec![deriv(1, 2.0, 1.0), deriv(0, p, 1.0)],
            )
        }
        "sine-gordon" => {
            arity(0)?;
            base(
                "sine-gordon",
                "w'' = Lap w - sin w",
                vec![
                    deriv(1, 2.0, 1.0),
                    EnergyTerm::CosinePotential { coeff: 1.0 },
                ],
            )
        }
        "plaplace-wave" => {
            arity(2)?;
            let p = parse_f64(args[0], "plaplace-wave")?;
            let q = parse_f64(args[1], "plaplace-wave")?;
            base(
                &format!("plaplace-wave({p},{q})"),
                &format!("w'' = Lap_{p} w - |w|^{}w", q - 2.0),
                vec![deriv(1, p, 1.0), deriv(0, q, 1.0)],
            )
        }
        "beam" => {
            arity(2)?;
            let p = parse_f64(args[0], "beam")?;
            let q = parse_f64(args[1], "beam")?;
            base(
                &format!("beam({p},{q})"),
                &format!("w'' = -Lap^2 w + Lap_{p} w - |w|^{}w", q - 2.0),
                vec![deriv(2, 2.0, 1.0), deriv(1, p, 1.0), deriv(0, q, 1.0)],
            )
        }
        "kirchhoff" => {
            arity(0)?;
            base(
                "kirchhoff",
                "w'' = (integral |grad w|^2) Lap w",
                vec![EnergyTerm::KirchhoffQuartic { coeff: 1.0 }],
            )
        }
        "fractional-wave" => {
            arity(3)?;
            let s = parse_f64(args[0], "fractional-wave")?;
            let lambda = parse_f64(args[1], "fractional-wave")?;
            let p = parse_f64(args[2], "fractional-wave")?;
            if !(s > 0.0 && s <= 1.0) {
                return Err(WideError::InvalidParameter(format!(
                    "fractional order must lie in (0, 1], got {s}"
                )));
            }
            // Defocusing sign convention: w'' = -(-Lap)^s w - lambda |w|^{p-2} w,
            // the choice for which the energy is nonnegative.
            let mut terms = vec![EnergyTerm::SobolevQuadratic {
                order: s,
                coeff: 1.0,
            }];
            if lambda > 0.0 {
                terms.push(deriv(0, p, lambda));
            }
            base(
                &format!("fractional-wave({s},{lambda},{p})"),
                &format!("w'' = -(-Lap)^{s} w - {lambda} |w|^{}w", p - 2.0),
                terms,
            )
        }
        "telegraph-on-top-of" => {
            arity(1)?;
            let inner = preset(args[0])?;
            damped(inner, "telegraph-on-top-of", " - w'", vec![(0, 1.0)])
        }
        "strong-damping-on-top-of" => {
            arity(1)?;
            let inner = preset(args[0])?;
            damped(
                inner,
                "strong-damping-on-top-of",
                " + Lap w'",
                vec![(1, 1.0)],
            )
        }
        "full-damping-on-top-of" => {
            arity(1)?;
            let inner = preset(args[0])?;
            damped(
                inner,
                "full-damping-on-top-of",
                " - Lap^2 w' + Lap w' - w'",
                vec![(2, 1.0), (1, 1.0), (0, 1.0)],
            )
        }
        _ => Err(WideError::UnknownPreset(full_name.to_string())),
    }
}

fn damped(
    inner: Preset,
    wrapper: &str,
    eq_suffix: &str,
    terms: Vec<(usize, f64)>,
) -> Result<Preset> {
    if inner.kappa {
        return Err(WideError::InvalidParameter(format!(
            "cannot attach {wrapper} to the already damped preset {}",
            inner.name
        )));
    }
    Ok(Preset {
        name: format!("{wrapper}({})", inner.name),
        equation: format!("{}{}", inner.equation, eq_suffix),
        energy: inner.energy,
        dissipation: DissipationSpec::new(terms)?,
        kappa: true,
    })
}

/// All registry entry names with a short description, for `presets` output.
pub fn registry() -> Vec<(&'static str, &'static str)> {
    vec![
        ("wave", "linear wave equation w'' = Lap w"),
        ("klein-gordon", "Klein-Gordon equation w'' = Lap w - w"),
        ("biharmonic", "bi-harmonic wave equation w'' = -Lap^2 w"),
        (
            "nlw(p)",
            "defocusing nonlinear wave w'' = Lap w - |w|^{p-2}w",
        ),
        ("sine-gordon", "sine-Gordon equation w'' = Lap w - sin w"),
        (
            "plaplace-wave(p,q)",
            "quasilinear wave w'' = Lap_p w - |w|^{q-2}w",
        ),
        (
            "beam(p,q)",
            "nonlinear vibrating beam w'' = -Lap^2 w + Lap_p w - |w|^{q-2}w",
        ),
        (
            "kirchhoff",
            "Kirchhoff equation w'' = (integral |grad w|^2) Lap w",
        ),
        (
            "fractional-wave(s,lambda,p)",
            "fractional wave w'' = -(-Lap)^s w - lambda |w|^{p-2}w",
        ),
        ("telegraph-on-top-of(X)", "adds the damping term -w' to X"),
        (
            "strong-damping-on-top-of(X)",
            "adds the strong damping term Lap w' to X",
        ),
        (
            "full-damping-on-top-of(X)",
            "adds -Lap^2 w' + Lap w' - w' to X",
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_is_undamped_dirichlet_energy() {
        let p = preset("wave").unwrap();
        assert_eq!(
            p.energy.terms(),
            &[EnergyTerm::DerivPower {
                order: 1,
                exponent: 2.0,
                coeff: 1.0
            }]
        );
        assert!(p.dissipation.is_empty());
        assert!(!p.kappa);
    }

    #[test]
    fn klein_gordon_adds_mass_term() {
        let p = preset("klein-gordon").unwrap();
        assert_eq!(p.energy.terms().len(), 2);
        assert!(p.energy.terms().contains(&EnergyTerm::DerivPower {
            order: 0,
            exponent: 2.0,
            coeff: 1.0
        }));
    }

    #[test]
    fn telegraph_wrapper_sets_kappa_and_mass_damping() {
        let p = preset("telegraph-on-top-of(nlw(4))").unwrap();
        assert!(p.kappa);
        assert_eq!(p.dissipation.terms(), &[(0, 1.0)]);
        assert_eq!(p.energy.terms().len(), 2);
    }

    #[test]
    fn nested_wrappers_rejected() {
        assert!(preset("telegraph-on-top-of(strong-damping-on-top-of(wave))").is_err());
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(preset("heat"), Err(WideError::UnknownPreset(_))));
        assert!(preset("nlw(4").is_err());
    }

    #[test]
    fn all_gradcheck_presets_resolve() {
        for name in GRADCHECK_PRESETS {
            let p = preset(name).expect(name);
            assert_eq!(p.kappa, !p.dissipation.is_empty(), "{name}");
        }
    }
}
