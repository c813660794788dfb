//! Cross-module checks that tie the density pipeline to independent
//! expansions and frozen end-to-end references.

use coulomb_core::potential::{self, RadialPotential};
use coulomb_core::{edge, opkernel};

fn mixed() -> RadialPotential {
    RadialPotential::from_even_poly(&[(1.0, 2), (1.0, 4)]).unwrap()
}

#[test]
fn bulk_density_carries_the_half_delta_l_shift() {
    // deep inside the droplet of Q = r² + r⁴ the density approaches
    // nΔQ + ΔL/2 with ΔL = Δ log ΔQ = 4/(1+4r²)², here written out by hand
    let pot = mixed();
    let r: f64 = 0.4;
    let delta_q = potential::delta_q(&pot, r).unwrap();
    let delta_l = 4.0 / (1.0 + 4.0 * r * r).powi(2);
    for n in [256usize, 1024, 4096] {
        let basis = opkernel::radial_norms(&pot, n).unwrap();
        let density = opkernel::density_radial(&basis, &pot, r).unwrap();
        let gap = (density - n as f64 * delta_q - delta_l / 2.0).abs();
        assert!(
            gap <= 10.0 / n as f64,
            "bulk expansion off by {gap:.3e} at n = {n}"
        );
    }
}

#[test]
fn rescaled_edge_deficit_matches_a_frozen_reference() {
    // (R_64(1) − 32)/8 for the Ginibre weight, computed independently from
    // the Gamma-tail closed form
    let gin = RadialPotential::ginibre();
    let basis = opkernel::radial_norms(&gin, 64).unwrap();
    let exact = opkernel::density_radial(&basis, &gin, 1.0).unwrap();
    let deficit = (exact - 32.0) / 8.0;
    assert!(
        (deficit - (-0.132_991_900_030_611_99)).abs() <= 1e-9,
        "D_64(0) = {deficit:.15}"
    );
}

#[test]
fn densities_are_nonnegative_on_a_wide_grid() {
    let pots = [
        RadialPotential::ginibre(),
        RadialPotential::from_even_poly(&[(1.0, 4)]).unwrap(),
        mixed(),
    ];
    for pot in &pots {
        let radius = potential::droplet_radius(pot).unwrap();
        let basis = opkernel::radial_norms(pot, 64).unwrap();
        for k in 0..=40 {
            let r = 2.0 * radius * f64::from(k) / 40.0;
            let density = opkernel::density_radial(&basis, pot, r).unwrap();
            assert!(
                density >= 0.0,
                "negative density {density:e} at r = {r} for {}",
                pot.label()
            );
        }
    }
}

#[test]
fn residual_csv_round_trips_through_parsing() {
    let gin = RadialPotential::ginibre();
    let study = edge::residual_study(&gin, &[32], &[-0.5, 0.0, 0.5], 1.5).unwrap();
    let csv = edge::profiles_to_csv(&study.profiles);
    for (i, line) in csv.lines().skip(1).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0].parse::<usize>().unwrap(), 32);
        let t: f64 = fields[1].parse().unwrap();
        assert_eq!(t, study.profiles[0].t_values[i]);
        let exact: f64 = fields[2].parse().unwrap();
        // 17 significant digits round-trip exactly
        assert_eq!(exact, study.profiles[0].exact[i]);
    }
}
