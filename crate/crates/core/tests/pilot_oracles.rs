use std::collections::HashMap;

use dschan::pilot::{assemble_frame, generate_pilot_positions, index_sets, qpsk_symbols};
use dschan::{PilotPlan, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circ(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

fn layout_ok(centers: &[usize], n: usize, order: usize) -> bool {
    let width = 2 * order - 1;
    // a lone zone must not wrap onto itself
    width <= n
        && centers
            .iter()
            .enumerate()
            .all(|(i, &a)| centers[i + 1..].iter().all(|&b| circ(a, b, n) >= width))
}

/// Every increasing `k`-subset of `0..n`.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[test]
fn feasibility_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for n in 4..=16 {
        for order in [1, 3, 5] {
            if order >= n {
                continue;
            }
            for groups in 1..=4 {
                let exists = subsets(n, groups).iter().any(|s| layout_ok(s, n, order));
                let drawn = generate_pilot_positions(n, groups, order, &mut rng);
                assert_eq!(drawn.is_ok(), exists, "N={n} G={groups} D={order}");
                if let Ok(c) = drawn {
                    assert!(layout_ok(&c, n, order));
                }
            }
        }
    }
}

#[test]
fn two_groups_of_order_three_need_ten_subcarriers() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    assert!(generate_pilot_positions(9, 2, 3, &mut rng).is_err());
    assert!(generate_pilot_positions(10, 2, 3, &mut rng).is_ok());
}

#[test]
fn layouts_are_drawn_uniformly() {
    let (n, groups, order) = (13, 2, 3);
    let valid: Vec<Vec<usize>> = subsets(n, groups)
        .into_iter()
        .filter(|s| layout_ok(s, n, order))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let draws = 20_000;
    let mut hist: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..draws {
        *hist
            .entry(generate_pilot_positions(n, groups, order, &mut rng).unwrap())
            .or_default() += 1;
    }
    assert_eq!(hist.len(), valid.len());
    let expected = draws as f64 / valid.len() as f64;
    let chi2: f64 = valid
        .iter()
        .map(|s| {
            let o = *hist.get(s).unwrap_or(&0) as f64;
            (o - expected).powi(2) / expected
        })
        .sum();
    // Wilson-Hilferty approximation of the 0.999 chi-square quantile
    let df = (valid.len() - 1) as f64;
    let h = 2.0 / (9.0 * df);
    let limit = df * (1.0 - h + 3.09 * h.sqrt()).powi(3);
    assert!(
        chi2 < limit,
        "chi2 = {chi2} over {} layouts (limit {limit})",
        valid.len()
    );
}

#[test]
fn random_plans_keep_guard_zones_disjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    let cfg = SystemConfig::desk_scale();
    for _ in 0..1000 {
        let plan = PilotPlan::generate(&cfg, &mut rng).unwrap();
        assert!(layout_ok(&plan.centers, plan.subcarriers, plan.bem_order));
        assert_eq!(plan.pilot_zone().len(), cfg.pilot_zone_len());
        assert_eq!(plan.data_positions().len(), plan.data_len());
        let sets = index_sets(&plan);
        for set in &sets.sets {
            for &k in set {
                assert!(plan.pilot_zone().binary_search(&k).is_ok());
            }
        }
    }
}

#[test]
fn frame_places_pilots_guards_and_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(204);
    let cfg = SystemConfig {
        subcarriers: 64,
        pilot_groups: 6,
        antennas: 3,
        ..SystemConfig::desk_scale()
    };
    let plan = PilotPlan::generate(&cfg, &mut rng).unwrap();
    let data = qpsk_symbols(plan.data_len(), &mut rng);
    for a in 0..cfg.antennas {
        let frame = assemble_frame(&plan, &data, a).unwrap();
        for (g, &c) in plan.centers.iter().enumerate() {
            assert_eq!(frame[c], plan.value(g, a));
        }
        let zone = plan.pilot_zone();
        for k in zone.iter().filter(|k| !plan.centers.contains(k)) {
            assert_eq!(frame[*k].norm(), 0.0);
        }
        for (k, v) in plan.data_positions().iter().zip(&data) {
            assert_eq!(frame[*k], *v);
        }
    }
    assert!(assemble_frame(&plan, &data[1..], 0).is_err());
}

#[test]
fn plan_survives_toml_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(205);
    let plan = PilotPlan::generate(&SystemConfig::desk_scale(), &mut rng).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.toml");
    plan.save(&path).unwrap();
    assert_eq!(PilotPlan::load(&path).unwrap(), plan);

    let mut broken = plan.clone();
    broken.centers[1] = broken.centers[0] + 1;
    std::fs::write(&path, toml::to_string(&broken).unwrap()).unwrap();
    assert!(PilotPlan::load(&path).is_err());
}
