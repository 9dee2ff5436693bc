//! Independent reference implementations checked against the library.

use std::f64::consts::PI;

use proptest::prelude::*;

use swarm_core::ergodic::{
    compute_control, ergodic_metric, forgetting_factor, grid_coeffs, BasisConfig, Coefficients,
    CoverageCoefficients, ErgodicConfig,
};
use swarm_core::flocking::{flock_control, Attractor, FlockCommand};
use swarm_core::grid::Grid;
use swarm_core::painter::{gaussian_smooth, paint, rasterize};
use swarm_core::rng::SimRng;
use swarm_core::{AgentState, Brush, DynamicsConfig, PainterConfig, Stroke, Team, Vec2};

fn agent(id: u32, p: Vec2, v: Vec2) -> AgentState {
    AgentState {
        id,
        team: Team::Red,
        position: p,
        velocity: v,
        altitude: 1.0,
    }
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (cx * cx + cy * cy).sqrt()
}

fn polyline_dist(p: (f64, f64), pts: &[(f64, f64)]) -> f64 {
    if pts.len() == 1 {
        return seg_dist(p, pts[0], pts[0]);
    }
    pts.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

fn stroke_strategy() -> impl Strategy<Value = (bool, f64, Vec<(f64, f64)>)> {
    (
        any::<bool>(),
        0.01f64..0.2,
        prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..6),
    )
}

fn to_stroke((attract, r, pts): &(bool, f64, Vec<(f64, f64)>)) -> Stroke {
    let brush = if *attract { Brush::Attract } else { Brush::Repel };
    Stroke::new(brush, *r, pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every cell of the full grid checked against a brute-force capsule test.
    #[test]
    fn rasterize_matches_brute_force_capsules(strokes in prop::collection::vec(stroke_strategy(), 1..4)) {
        let g = 50;
        let raw = rasterize(&strokes.iter().map(to_stroke).collect::<Vec<_>>(), None, g).unwrap();
        for iy in 0..g {
            for ix in 0..g {
                let c = ((ix as f64 + 0.5) / g as f64, (iy as f64 + 0.5) / g as f64);
                let mut expected = 0.0;
                let mut tie = false;
                for (attract, r, pts) in &strokes {
                    let d = polyline_dist(c, pts);
                    tie |= (d - r).abs() < 1e-12;
                    if d <= *r {
                        expected += if *attract { 1.0 } else { -1.0 };
                    }
                }
                if !tie {
                    prop_assert_eq!(raw.get(ix, iy), expected, "cell ({}, {})", ix, iy);
                }
            }
        }
    }

    /// Drawing A then B on top equals drawing A and B together.
    #[test]
    fn overlay_is_associative(a in prop::collection::vec(stroke_strategy(), 1..3),
                              b in prop::collection::vec(stroke_strategy(), 1..3)) {
        let cfg = PainterConfig::default();
        let a: Vec<Stroke> = a.iter().map(to_stroke).collect();
        let b: Vec<Stroke> = b.iter().map(to_stroke).collect();
        let both: Vec<Stroke> = a.iter().chain(&b).cloned().collect();
        let together = paint(&both, None, &cfg).unwrap();
        let layered = paint(&b, Some(&paint(&a, None, &cfg).unwrap()), &cfg).unwrap();
        prop_assert_eq!(together.raw(), layered.raw());
        prop_assert_eq!(together.density(), layered.density());
    }

    #[test]
    fn flocking_ignores_teammate_order(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = SimRng::new(seed);
        let mates: Vec<AgentState> = (0..n as u32)
            .map(|i| agent(i,
                Vec2::new(rng.range(0.4, 0.6), rng.range(0.4, 0.6)),
                Vec2::new(rng.range(-0.1, 0.1), rng.range(-0.1, 0.1))))
            .collect();
        let cmd = FlockCommand::with_attractors(vec![Attractor { position: Vec2::new(0.2, 0.7), weight: 1.5 }]);
        let dynamics = DynamicsConfig::default();
        let refs: Vec<&AgentState> = mates.iter().collect();
        let mut shuffled = refs.clone();
        rng.shuffle(&mut shuffled);
        for a in &mates {
            prop_assert_eq!(flock_control(a, &refs, &cmd, &dynamics), flock_control(a, &shuffled, &cmd, &dynamics));
        }
    }

    #[test]
    fn flocking_commutes_with_mirroring(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = SimRng::new(seed);
        let mirror = |v: Vec2| Vec2::new(1.0 - v.x, v.y);
        let flip = |v: Vec2| Vec2::new(-v.x, v.y);
        let mates: Vec<AgentState> = (0..n as u32)
            .map(|i| agent(i,
                Vec2::new(rng.range(0.3, 0.7), rng.range(0.3, 0.7)),
                Vec2::new(rng.range(-0.1, 0.1), rng.range(-0.1, 0.1))))
            .collect();
        let mirrored: Vec<AgentState> = mates
            .iter()
            .map(|a| AgentState { position: mirror(a.position), velocity: flip(a.velocity), ..a.clone() })
            .collect();
        let target = Vec2::new(rng.range(0.0, 1.0), rng.range(0.0, 1.0));
        let cmd = FlockCommand::with_attractors(vec![Attractor { position: target, weight: 0.7 }]);
        let cmd_m = FlockCommand::with_attractors(vec![Attractor { position: mirror(target), weight: 0.7 }]);
        let dynamics = DynamicsConfig::default();
        let refs: Vec<&AgentState> = mates.iter().collect();
        let refs_m: Vec<&AgentState> = mirrored.iter().collect();
        for (a, am) in mates.iter().zip(&mirrored) {
            let u = flock_control(a, &refs, &cmd, &dynamics);
            let um = flock_control(am, &refs_m, &cmd_m, &dynamics);
            prop_assert!((flip(u) - um).norm() < 1e-12, "{:?} vs {:?}", u, um);
        }
    }
}

fn mirror_index(i: isize, n: isize) -> usize {
    // Half-sample symmetric extension, period 2n.
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

#[test]
fn smoothing_matches_direct_2d_convolution() {
    let g = 24;
    let cfg = PainterConfig {
        grid_size: g,
        ..Default::default()
    };
    let mut rng = SimRng::new(17);
    let raw = Grid::from_cells(g, (0..g * g).map(|_| rng.range(-1.0, 2.0)).collect()).unwrap();
    let smoothed = gaussian_smooth(&raw, &cfg);

    let r = (cfg.truncate * cfg.sigma_cells).ceil() as isize;
    let w = |d: isize| (-((d * d) as f64) / (2.0 * cfg.sigma_cells * cfg.sigma_cells)).exp();
    let norm: f64 = (-r..=r).map(w).sum();
    let mut worst = 0.0f64;
    for iy in 0..g as isize {
        for ix in 0..g as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = raw.get(mirror_index(ix + dx, g as isize), mirror_index(iy + dy, g as isize));
                    acc += w(dx) * w(dy) * v;
                }
            }
            worst = worst.max((acc / (norm * norm) - smoothed.get(ix as usize, iy as usize)).abs());
        }
    }
    assert!(worst < 1e-12, "worst deviation {worst:e}");
}

#[test]
fn dot_rasterization_is_translation_equivariant() {
    let g = 50;
    let cell = 1.0 / g as f64;
    let at = |ix: usize, iy: usize| Vec2::new((ix as f64 + 0.5) * cell, (iy as f64 + 0.5) * cell);
    // 2.55 cells: no cell center sits on the boundary.
    let r = 0.051;
    let base = rasterize(&[Stroke::dot(Brush::Attract, r, at(10, 12))], None, g).unwrap();
    for (sx, sy) in [(7usize, 0usize), (0, 19), (23, 31)] {
        let moved = rasterize(&[Stroke::dot(Brush::Attract, r, at(10 + sx, 12 + sy))], None, g).unwrap();
        for iy in 0..g - sy {
            for ix in 0..g - sx {
                assert_eq!(base.get(ix, iy), moved.get(ix + sx, iy + sy));
            }
        }
        assert_eq!(base.sum(), moved.sum());
    }
}

fn f_k(k: (usize, usize), x: f64, y: f64) -> f64 {
    let h = |k: usize| if k == 0 { 1.0 } else { 0.5f64.sqrt() };
    (k.0 as f64 * PI * x).cos() * (k.1 as f64 * PI * y).cos() / (h(k.0) * h(k.1))
}

fn grad_f_k(k: (usize, usize), x: f64, y: f64) -> (f64, f64) {
    let h = |k: usize| if k == 0 { 1.0 } else { 0.5f64.sqrt() };
    let (a, b) = (k.0 as f64 * PI, k.1 as f64 * PI);
    let n = h(k.0) * h(k.1);
    (
        -a * (a * x).sin() * (b * y).cos() / n,
        -b * (a * x).cos() * (b * y).sin() / n,
    )
}

#[test]
fn basis_is_orthonormal_under_quadrature() {
    // The midpoint rule integrates cos(a pi x) cos(b pi x) exactly for a + b < 2M.
    let m = 64;
    let k = 6;
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    let mut s = 0.0;
                    for iy in 0..m {
                        for ix in 0..m {
                            let (x, y) = ((ix as f64 + 0.5) / m as f64, (iy as f64 + 0.5) / m as f64);
                            s += f_k((a, b), x, y) * f_k((c, d), x, y);
                        }
                    }
                    s /= (m * m) as f64;
                    let expected = if (a, b) == (c, d) { 1.0 } else { 0.0 };
                    worst = worst.max((s - expected).abs());
                }
            }
        }
    }
    assert!(worst < 1e-12, "worst {worst:e}");
}

/// A smooth density sampled on the game grid vs. a 4x finer grid.
#[test]
fn grid_coefficients_agree_with_finer_grid() {
    let density = |x: f64, y: f64| {
        let bump = |cx: f64, cy: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.02).exp();
        0.2 + bump(0.3, 0.3) + bump(0.7, 0.65)
    };
    let sample = |g: usize| {
        let cells: Vec<f64> = (0..g * g)
            .map(|i| density((((i % g) as f64) + 0.5) / g as f64, (((i / g) as f64) + 0.5) / g as f64))
            .collect();
        let total: f64 = cells.iter().sum();
        Grid::from_cells(g, cells.into_iter().map(|c| c / total).collect()).unwrap()
    };
    let basis = BasisConfig::new(8);
    let coarse = grid_coeffs(&sample(50), &basis);
    let fine = grid_coeffs(&sample(200), &basis);

    // Direct double sum over the fine grid, written out independently.
    let fine_grid = sample(200);
    let mut worst_direct = 0.0f64;
    for k in basis.modes() {
        let mut s = 0.0;
        for iy in 0..200 {
            for ix in 0..200 {
                s += fine_grid.get(ix, iy) * f_k(k, (ix as f64 + 0.5) / 200.0, (iy as f64 + 0.5) / 200.0);
            }
        }
        worst_direct = worst_direct.max((s - fine.get(k)).abs());
    }
    assert!(worst_direct < 1e-12, "direct sum {worst_direct:e}");
    // Midpoint error is O((k pi / G)^2) on a smooth density.
    let worst = coarse.max_abs_diff(&fine);
    assert!(worst < 2e-3, "coarse vs fine {worst:e}");
}

#[test]
fn coverage_matches_closed_form_sum() {
    let basis = BasisConfig::new(5);
    let gamma = forgetting_factor(0.1, 20.0);
    let mut rng = SimRng::new(3);
    let path: Vec<Vec2> = (0..100).map(|_| Vec2::new(rng.uniform(), rng.uniform())).collect();
    let mut cc = CoverageCoefficients::zeros(&basis, gamma);
    for s in &path {
        cc.update(*s, &basis);
    }
    let mut worst = 0.0f64;
    for k in basis.modes() {
        let expected: f64 = path
            .iter()
            .enumerate()
            .map(|(i, s)| (1.0 - gamma) * gamma.powi(99 - i as i32) * f_k(k, s.x, s.y))
            .sum();
        worst = worst.max((expected - cc.coeffs().get(k)).abs());
    }
    assert!(worst < 1e-12, "worst {worst:e}");
    assert_eq!(cc.sample_count(), 100);
}

#[test]
fn metric_matches_triple_loop() {
    let k = 7;
    let basis = BasisConfig::new(k);
    let mut rng = SimRng::new(8);
    let c = Coefficients::from_values(k, (0..k * k).map(|_| rng.range(-1.0, 1.0)).collect());
    let phi = Coefficients::from_values(k, (0..k * k).map(|_| rng.range(-1.0, 1.0)).collect());
    let q = 2.5;
    let mut expected = 0.0;
    for k1 in 0..k {
        for k2 in 0..k {
            let lam = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64).powf(1.5);
            let d = c.get((k1, k2)) - phi.get((k1, k2));
            expected += q * lam * d * d;
        }
    }
    let got = ergodic_metric(&c, &phi, &basis, q);
    assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
}

/// Straight-line rollout, closed-form costate sum.
#[test]
fn control_matches_straight_line_oracle() {
    let cfg = ErgodicConfig {
        order: 3,
        horizon_steps: 4,
        horizon: 0.4,
        r: [[0.02, 0.005], [0.005, 0.03]],
        ..Default::default()
    };
    let dynamics = DynamicsConfig {
        u_max: 100.0,
        ..Default::default()
    };
    let basis = BasisConfig::new(3);
    let p0 = Vec2::new(0.31, 0.58);
    let v0 = Vec2::new(0.07, -0.04);
    let team_c = Coefficients::at_point(Vec2::new(0.6, 0.3), &basis);
    let phi = Coefficients::at_point(Vec2::new(0.2, 0.7), &basis);
    let u = compute_control(&agent(0, p0, v0), &team_c, &phi, &basis, &cfg, &dynamics).unwrap();

    let n = 4;
    let h = 0.1;
    let w = 1.0 - (-dynamics.dt_control / cfg.coverage_memory).exp();
    let grad_l = |x: f64, y: f64| {
        let (mut gx, mut gy) = (0.0, 0.0);
        for k1 in 0..3 {
            for k2 in 0..3 {
                let lam = (1.0 + (k1 * k1 + k2 * k2) as f64).powf(-1.5);
                let coef = 2.0 * cfg.q * w * lam * (team_c.get((k1, k2)) - phi.get((k1, k2)));
                let (fx, fy) = grad_f_k((k1, k2), x, y);
                gx += coef * fx;
                gy += coef * fy;
            }
        }
        let (a, m) = (cfg.barrier_alpha, cfg.barrier_margin);
        let wall = |v: f64| a * ((a * (v - (1.0 - m))).exp() - (a * (m - v)).exp());
        (gx + wall(x), gy + wall(y))
    };
    // rho_v(0) = h^2 sum_{i=1..N} (i - 1) grad l(p_i), p_i = p0 + i h v0.
    let (mut rx, mut ry) = (0.0, 0.0);
    for i in 1..=n {
        let (gx, gy) = grad_l(p0.x + i as f64 * h * v0.x, p0.y + i as f64 * h * v0.y);
        rx += h * h * (i - 1) as f64 * gx;
        ry += h * h * (i - 1) as f64 * gy;
    }
    let [[a, b], [c, d]] = cfg.r;
    let det = a * d - b * c;
    let expected = Vec2::new(-(d * rx - b * ry) / det, -(-c * rx + a * ry) / det);
    assert!((u - expected).norm() < 1e-9, "{u:?} vs {expected:?}");
    assert!(u.norm() > 1e-6, "oracle case should be non-trivial");
}

#[test]
fn control_heads_toward_uncovered_mass() {
    let cfg = ErgodicConfig::default();
    let dynamics = DynamicsConfig::default();
    let basis = BasisConfig::new(cfg.order);
    let phi = swarm_core::ergodic::target_coeffs(
        &paint(&[Stroke::dot(Brush::Attract, 0.08, Vec2::new(0.8, 0.5))], None, &PainterConfig::default()).unwrap(),
        &basis,
    );
    // Team history sits on the left half.
    let team_c = Coefficients::at_point(Vec2::new(0.25, 0.5), &basis);
    let u = compute_control(&agent(0, Vec2::new(0.5, 0.5), Vec2::ZERO), &team_c, &phi, &basis, &cfg, &dynamics).unwrap();
    assert!(u.x > 0.0 && u.x.abs() > 10.0 * u.y.abs(), "{u:?}");
}
