mod common;

use vpb_core::block::eval_surface;
use vpb_core::rng::rng_from_seed;
use vpb_core::vectorize::{vpb_quadrature_oracle, vpb_values};

#[test]
fn exact_cells_agree_with_monte_carlo() {
    let mut rng = rng_from_seed(42);
    for trial in 0..25 {
        let (cfg, grid) = common::block_setup(&mut rng);
        let bmax = cfg.domain.birth_max;
        let pmax = cfg.domain.pers_max;
        let d = common::diagram(&mut rng, 5, bmax, pmax);
        let exact = vpb_values(&cfg, &grid, &d);
        let mc = vpb_quadrature_oracle(&cfg, &grid, &d, 100_000, trial).unwrap();
        for c in 0..grid.len() {
            let err = (exact[c] - mc.values[c]).abs();
            assert!(err <= 4.0 * mc.std_errors[c] + 1e-12, "trial {trial} cell {c}: {} vs {} (se {})", exact[c], mc.values[c], mc.std_errors[c]);
        }
    }
}

#[test]
fn finer_grids_refine_coarser_ones() {
    let mut rng = rng_from_seed(3);
    for _ in 0..30 {
        let (cfg, grid) = common::block_setup(&mut rng);
        let d = common::diagram(&mut rng, 6, cfg.domain.birth_max, cfg.domain.pers_max);
        let coarse = vpb_values(&cfg, &grid, &d);
        let fine_grid = vpb_core::vectorize::GridPartition::new(grid.region, grid.nx * 2, grid.ny * 3).unwrap();
        let fine = vpb_values(&cfg, &fine_grid, &d);
        for cy in 0..grid.ny {
            for cx in 0..grid.nx {
                let mut s = 0.0;
                for fy in 0..3 {
                    for fx in 0..2 {
                        s += fine[(cy * 3 + fy) * fine_grid.nx + cx * 2 + fx];
                    }
                }
                let c = coarse[cy * grid.nx + cx];
                assert!((s - c).abs() <= 1e-12 * (1.0 + c.abs()), "{s} vs {c}");
            }
        }
    }
}

#[test]
fn surface_is_the_sum_of_indicators() {
    let mut rng = rng_from_seed(4);
    for _ in 0..50 {
        let (cfg, _) = common::block_setup(&mut rng);
        let d = common::diagram(&mut rng, 6, cfg.domain.birth_max, cfg.domain.pers_max);
        let (x, y) = (0.3 * cfg.domain.birth_max, 0.4 * cfg.domain.pers_max);
        let want: f64 = d
            .points
            .iter()
            .filter(|p| {
                let h = 0.5 * cfg.length.side(p.persistence);
                (x - p.birth).abs() <= h && (y - p.persistence).abs() <= h
            })
            .map(|p| cfg.point_value.eval(p))
            .sum();
        assert!((eval_surface(&cfg, &d, x, y) - want).abs() < 1e-12);
    }
}
