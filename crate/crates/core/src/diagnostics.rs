//! Metrics the process is judged by: total variation, mass, discrete L¹
//! distance, density–flux scatter at probes, and per-phase moments.

use std::collections::BTreeMap;

use crate::engine::SamplePath;
use crate::error::{Error, Result};
use crate::flux::FluxFamily;
use crate::grid::GridFunction;

/// `Σ |u_{i+1} − u_i|`
pub fn tv(u: &GridFunction) -> f64 {
    u.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// `dx·Σ u_i`
pub fn mass(u: &GridFunction) -> f64 {
    u.grid().dx() * u.values().iter().sum::<f64>()
}

/// `dx·Σ |u_i − v_i|`
pub fn l1_distance(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", u.grid(), v.grid())));
    }
    let sum: f64 = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(u.grid().dx() * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRecord {
    pub sample_id: u64,
    pub t: f64,
    pub probe_x: f64,
    pub rho: f64,
    pub flux: f64,
}

/// Density–flux pairs at `probes` × `times`, ordered by time then probe.
/// Densities are the recorded probe-cell values; fluxes are recomputed as
/// `f^{α(t)}(ρ)`.
pub fn extract_scatter(
    path: &SamplePath,
    family: &FluxFamily,
    probes: &[f64],
    times: &[f64],
) -> Result<Vec<ScatterRecord>> {
    let columns = probes
        .iter()
        .map(|&x| {
            path.probe_positions
                .iter()
                .position(|&p| p == x)
                .ok_or_else(|| Error::MissingSnapshot(format!("probe x = {x} not recorded")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(times.len() * probes.len());
    for &t in times {
        let k = path.snapshots.partition_point(|s| s.t < t);
        let snap = path
            .snapshots
            .get(k)
            .filter(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::MissingSnapshot(format!("no snapshot at t = {t}")))?;
        let flux = family.member(snap.alpha)?;
        for (&x, &j) in probes.iter().zip(&columns) {
            let rho = snap.probe_values[j];
            records.push(ScatterRecord {
                sample_id: path.sample_id(),
                t: snap.t,
                probe_x: x,
                rho,
                flux: flux.value(rho),
            });
        }
    }
    Ok(records)
}

/// Unbiased sample moments of density and flux for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSummary {
    pub scenario: String,
    pub probe_x: f64,
    pub count: usize,
    pub rho_mean: f64,
    pub rho_variance: f64,
    pub flux_mean: f64,
    pub flux_variance: f64,
}

/// `(mean, unbiased variance)`; needs at least two values.
pub fn sample_moments(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::EmptyGroup(format!(
            "need at least 2 values for a variance, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, ss / (n - 1.0)))
}

/// Moments per probe position for the records of one scenario, ordered by
/// probe position.
pub fn phase_statistics(scenario: &str, records: &[ScatterRecord]) -> Result<Vec<PhaseSummary>> {
    if records.is_empty() {
        return Err(Error::EmptyGroup(format!("no records for scenario `{scenario}`")));
    }
    let mut groups: BTreeMap<u64, (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        // order-preserving key for finite floats
        let bits = r.probe_x.to_bits();
        let key = if r.probe_x.is_sign_negative() { !bits } else { bits | (1 << 63) };
        let entry = groups.entry(key).or_insert_with(|| (r.probe_x, Vec::new(), Vec::new()));
        entry.1.push(r.rho);
        entry.2.push(r.flux);
    }
    groups
        .into_values()
        .map(|(probe_x, rho, flux)| {
            let tag = |e: Error| Error::EmptyGroup(format!("{scenario} @ x = {probe_x}: {e}"));
            let (rho_mean, rho_variance) = sample_moments(&rho).map_err(tag)?;
            let (flux_mean, flux_variance) = sample_moments(&flux).map_err(tag)?;
            Ok(PhaseSummary {
                scenario: scenario.to_string(),
                probe_x,
                count: rho.len(),
                rho_mean,
                rho_variance,
                flux_mean,
                flux_variance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv(&GridFunction::constant(grid(8), 3.0).unwrap()), 0.0);
        let step = GridFunction::new(grid(4), vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(tv(&step), 1.0);
        let h = 0.7;
        let hat = GridFunction::from_fn(grid(101), |x| h * (1.0 - (2.0 * x - 1.0).abs())).unwrap();
        // unimodal: up from the first value to the peak, down to the last
        let v = hat.values();
        let expected = 2.0 * hat.max() - v[0] - v[100];
        assert!((tv(&hat) - expected).abs() < 1e-14);
        assert_eq!(hat.max(), h);
    }

    #[test]
    fn l1_examples() {
        let g = Grid::new(-1.0, 3.0, 40).unwrap();
        let u = GridFunction::from_fn(g, |x| x.sin()).unwrap();
        assert_eq!(l1_distance(&u, &u).unwrap(), 0.0);
        let v = GridFunction::from_fn(g, |x| x.sin() + 0.25).unwrap();
        assert!((l1_distance(&u, &v).unwrap() - 0.25 * 4.0).abs() < 1e-12);
        let w = GridFunction::constant(grid(40), 0.0).unwrap();
        assert!(matches!(l1_distance(&u, &w), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn moments() {
        assert_eq!(sample_moments(&[2.0, 2.0, 2.0]).unwrap(), (2.0, 0.0));
        let (a, b) = (1.5, -0.25);
        let (_, var) = sample_moments(&[a, b]).unwrap();
        assert!((var - (a - b) * (a - b) / 2.0).abs() < 1e-15);
        assert!(sample_moments(&[1.0]).is_err());
        assert!(phase_statistics("x", &[]).is_err());
    }

    #[test]
    fn phase_statistics_groups_by_probe() {
        let rec = |probe_x, rho, flux| ScatterRecord {
            sample_id: 0,
            t: 0.0,
            probe_x,
            rho,
            flux,
        };
        let records = [rec(1.0, 1.0, 2.0), rec(-1.0, 0.0, 0.0), rec(1.0, 3.0, 2.0), rec(-1.0, 2.0, 4.0)];
        let s = phase_statistics("demo", &records).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].probe_x, -1.0);
        assert_eq!((s[0].rho_mean, s[0].rho_variance), (1.0, 2.0));
        assert_eq!((s[0].flux_mean, s[0].flux_variance), (2.0, 8.0));
        assert_eq!(s[1].flux_variance, 0.0);
    }

    proptest! {
        #[test]
        fn metrics_match_brute_force(vals in proptest::collection::vec(-5.0f64..5.0, 10), other in proptest::collection::vec(-5.0f64..5.0, 10)) {
            let g = grid(10);
            let u = GridFunction::new(g, vals.clone()).unwrap();
            let v = GridFunction::new(g, other.clone()).unwrap();
            let mut brute_tv = 0.0;
            for i in 0..9 {
                brute_tv += (vals[i + 1] - vals[i]).abs();
            }
            let mut brute_mass = 0.0;
            let mut brute_l1 = 0.0;
            for i in 0..10 {
                brute_mass += vals[i];
                brute_l1 += (vals[i] - other[i]).abs();
            }
            prop_assert_eq!(tv(&u), brute_tv);
            prop_assert_eq!(mass(&u), 0.1 * brute_mass);
            prop_assert_eq!(l1_distance(&u, &v).unwrap(), 0.1 * brute_l1);
        }

        #[test]
        fn l1_triangle(a in proptest::collection::vec(-5.0f64..5.0, 12), b in proptest::collection::vec(-5.0f64..5.0, 12), c in proptest::collection::vec(-5.0f64..5.0, 12)) {
            let g = grid(12);
            let (a, b, c) = (GridFunction::new(g, a).unwrap(), GridFunction::new(g, b).unwrap(), GridFunction::new(g, c).unwrap());
            let ab = l1_distance(&a, &b).unwrap();
            prop_assert!(ab <= l1_distance(&a, &c).unwrap() + l1_distance(&c, &b).unwrap() + 1e-12);
        }
    }
}
