//! Exact dominated hypervolume for small minimization fronts (the search
//! progress metric). Objectives are min-max normalized over the point set
//! and measured against a reference box corner at `reference` (1.1 by
//! convention) in every normalized dimension.

/// Exact hypervolume by recursive dimension sweep. Degenerate dimensions
/// (min == max over the set) normalize to zero. Empty input yields zero.
pub fn hypervolume(points: &[Vec<f64>], reference: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let dims = points[0].len();
    assert!(points.iter().all(|p| p.len() == dims), "ragged objective rows");

    // Min-max normalization over the archive.
    let mut lo = vec![f64::INFINITY; dims];
    let mut hi = vec![f64::NEG_INFINITY; dims];
    for p in points {
        for d in 0..dims {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let normalized: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            (0..dims)
                .map(|d| {
                    if hi[d] > lo[d] {
                        (p[d] - lo[d]) / (hi[d] - lo[d])
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let reference = vec![reference; dims];
    hv_recursive(&nondominated(normalized), &reference)
}

fn nondominated(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut keep: Vec<Vec<f64>> = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates_min(q, p) {
                continue 'outer;
            }
        }
        // Drop exact duplicates beyond the first occurrence.
        if points[..i].iter().any(|q| q == p) {
            continue;
        }
        keep.push(p.clone());
    }
    keep
}

fn dominates_min(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn hv_recursive(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let dims = reference.len();
    if points.is_empty() {
        return 0.0;
    }
    if dims == 1 {
        let best = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return (reference[0] - best).max(0.0);
    }
    // Sweep the last dimension in ascending order; each slab contributes
    // the (dims-1)-volume of the points entered so far.
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a[dims - 1].partial_cmp(&b[dims - 1]).unwrap());
    let mut total = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::new();
    for i in 0..sorted.len() {
        active.push(sorted[i][..dims - 1].to_vec());
        let top = if i + 1 < sorted.len() {
            sorted[i + 1][dims - 1]
        } else {
            reference[dims - 1]
        };
        let height = top - sorted[i][dims - 1];
        if height > 0.0 {
            let slab = nondominated(active.clone());
            total += hv_recursive(&slab, &reference[..dims - 1]) * height;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn empty_and_single_point_boxes() {
        assert_eq!(hypervolume(&[], 1.1), 0.0);
        // A single point normalizes to the origin: volume 1.1^d.
        let p = vec![vec![3.0, 5.0, 7.0, 9.0]];
        let hv = hypervolume(&p, 1.1);
        assert!((hv - 1.1f64.powi(4)).abs() < 1e-12);
        assert!((1.1f64.powi(4) - 1.4641).abs() < 1e-12);
    }

    #[test]
    fn dominated_point_changes_nothing() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let hv_a = hypervolume(&a, 1.1);
        // (1, 1) is dominated by both corners and stays inside the
        // normalization bounds.
        let b = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let hv_b = hypervolume(&b, 1.1);
        assert!((hv_a - hv_b).abs() < 1e-12);
    }

    #[test]
    fn two_point_hand_value() {
        // Normalized corners (0,1) and (1,0) with ref (1.1, 1.1):
        // union = 1.1*1.1 - (dominated-neither region) -> by inclusion-
        // exclusion: 0.1*1.1 + 1.1*0.1 + 1.0*1.0 - overlaps... direct:
        // box(0,1) = 1.1*0.1, box(1,0) = 0.1*1.1, intersection 0.1*0.1.
        let pts = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let expect = 1.1 * 0.1 + 0.1 * 1.1 - 0.1 * 0.1;
        assert!((hypervolume(&pts, 1.1) - expect).abs() < 1e-12);
    }

    #[test]
    fn matches_monte_carlo_in_2d() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let pts: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let exact = hypervolume(&pts, 1.1);

            // Oracle: rejection sampling in the normalized box.
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for p in &pts {
                for d in 0..2 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            let norm: Vec<[f64; 2]> = pts
                .iter()
                .map(|p| [(p[0] - lo[0]) / (hi[0] - lo[0]), (p[1] - lo[1]) / (hi[1] - lo[1])])
                .collect();
            let samples = 1_000_000;
            let mut inside = 0u32;
            for _ in 0..samples {
                let x = rng.gen::<f64>() * 1.1;
                let y = rng.gen::<f64>() * 1.1;
                if norm.iter().any(|p| p[0] <= x && p[1] <= y) {
                    inside += 1;
                }
            }
            let mc = inside as f64 / samples as f64 * 1.1 * 1.1;
            assert!((mc - exact).abs() < 0.01, "MC {mc} vs exact {exact}");
        }
    }

    #[test]
    fn adding_nondominated_point_never_decreases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        // Points on a simplex front so normalization bounds stay fixed.
        let mut pts: Vec<Vec<f64>> = vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, 0.5], vec![0.5, 0.5, 0.0], vec![0.2, 0.9, 1.0], vec![0.9, 0.2, 1.0]];
        let mut last = hypervolume(&pts, 1.1);
        for _ in 0..10 {
            let x = rng.gen::<f64>();
            let y = 1.0 - x;
            pts.push(vec![x, y, rng.gen::<f64>()]);
            let hv = hypervolume(&pts, 1.1);
            assert!(hv >= last - 1e-9);
            last = hv;
        }
    }
}
