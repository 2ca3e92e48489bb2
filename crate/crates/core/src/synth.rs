//! Synthetic datasets and projection families for the sensitivity
//! experiments.
//!
//! Experiments A and B share one original dataset: six unit spheres in
//! 100 dimensions whose centers sit on distinct axes at distance 5 from the
//! origin. Their projections are disks on a ring of radius 5; the disk
//! radius `5·sin(5°)` makes two disks on the ring touch when their centers
//! are 10° apart. Draws happen in the same order for every angle, so a
//! fixed stream produces the same points and only the disk placement moves.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{cos, floor, sin, sqrt};
use crate::matrix::Matrix;
use crate::model::PairedEmbedding;

pub const SPHERE_DIM: usize = 100;
pub const N_SPHERES: usize = 6;
pub const SPHERE_RADIUS: f64 = 1.0;
pub const RING_RADIUS: f64 = 5.0;

/// Disk radius at which disks on the ring touch at a 10° separation.
pub fn disk_radius() -> f64 {
    RING_RADIUS * sin(5.0_f64.to_radians())
}

fn sphere_point<R: Rng + ?Sized>(sphere: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..SPHERE_DIM).map(|_| StandardNormal.sample(rng)).collect();
    let norm = sqrt(v.iter().map(|x| x * x).sum());
    for x in &mut v {
        *x *= SPHERE_RADIUS / norm;
    }
    v[sphere] += RING_RADIUS;
    v
}

fn disk_offset<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    let r = disk_radius() * sqrt(rng.random::<f64>());
    let t = 2.0 * PI * rng.random::<f64>();
    [r * cos(t), r * sin(t)]
}

fn ring_point(angle_deg: f64, offset: [f64; 2]) -> [f64; 2] {
    let a = angle_deg.to_radians();
    [RING_RADIUS * cos(a) + offset[0], RING_RADIUS * sin(a) + offset[1]]
}

/// Draws the spheres and per-point disk offsets; `disk_angle(sphere, i)`
/// places point `i` of a sphere on the ring.
fn sphere_dataset<R, F>(points_per_sphere: usize, rng: &mut R, disk_angle: F) -> Result<PairedEmbedding>
where
    R: Rng + ?Sized,
    F: Fn(usize, usize) -> f64,
{
    let n = N_SPHERES * points_per_sphere;
    let mut high = Vec::with_capacity(n);
    let mut low = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for s in 0..N_SPHERES {
        for i in 0..points_per_sphere {
            high.push(sphere_point(s, rng));
            low.push(ring_point(disk_angle(s, i), disk_offset(rng)));
            labels.push(s as i64);
        }
    }
    PairedEmbedding::new(Matrix::from_rows(&high)?, Matrix::from_rows(&low)?)?.with_labels(labels)
}

fn check_angle(angle_deg: f64, max: f64) -> Result<()> {
    if !(0.0..=max).contains(&angle_deg) {
        return Err(Error::InvalidParameter(alloc::format!(
            "angle {angle_deg} outside [0, {max}]"
        )));
    }
    Ok(())
}

/// Experiment A (False Groups): six disks, one per sphere, grouped in three
/// pairs. Pair `p` sits at `120°·p` and `120°·p + angle`; at 60° the six
/// disks are evenly spaced (the faithful layout), at 0° each pair coincides.
pub fn gen_experiment_a<R: Rng + ?Sized>(
    angle_deg: f64,
    points_per_sphere: usize,
    rng: &mut R,
) -> Result<PairedEmbedding> {
    check_angle(angle_deg, 60.0)?;
    sphere_dataset(points_per_sphere, rng, |s, _| 120.0 * (s / 2) as f64 + angle_deg * (s % 2) as f64)
}

/// Experiment B (Missing Groups): twelve disks, each sphere split over a
/// neighboring pair at `60°·s` and `60°·s + angle`. At 30° all twelve disks
/// are evenly spaced; at 0° each pair merges back into one disk.
pub fn gen_experiment_b<R: Rng + ?Sized>(
    angle_deg: f64,
    points_per_sphere: usize,
    rng: &mut R,
) -> Result<PairedEmbedding> {
    check_angle(angle_deg, 30.0)?;
    let half = points_per_sphere / 2;
    sphere_dataset(points_per_sphere, rng, |s, i| {
        60.0 * s as f64 + if i < half { 0.0 } else { angle_deg }
    })
}

/// Experiment C: replaces `floor(rate·N)` uniformly chosen projected points by
/// uniform samples over the projection's bounding box. With a fixed stream
/// the replaced subsets are nested across rates.
pub fn gen_experiment_c<R: Rng + ?Sized>(
    base: &PairedEmbedding,
    replacement_rate: f64,
    rng: &mut R,
) -> Result<PairedEmbedding> {
    if !(0.0..=1.0).contains(&replacement_rate) {
        return Err(Error::InvalidParameter(alloc::format!(
            "replacement rate {replacement_rate} outside [0, 1]"
        )));
    }
    let proj = base.projected();
    let (n, d) = (proj.rows(), proj.cols());
    let mut lo = alloc::vec![f64::INFINITY; d];
    let mut hi = alloc::vec![f64::NEG_INFINITY; d];
    for row in proj.iter_rows() {
        for (c, &v) in row.iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }
    let count = floor(replacement_rate * n as f64) as usize;
    let mut out = proj.clone();
    for &i in &order {
        let fresh: Vec<f64> = (0..d).map(|c| lo[c] + (hi[c] - lo[c]) * rng.random::<f64>()).collect();
        if order.iter().position(|&x| x == i).unwrap_or(n) < count {
            out.row_mut(i).copy_from_slice(&fresh);
        }
    }
    let e = PairedEmbedding::new(base.original().clone(), out)?;
    match base.labels() {
        Some(l) => e.with_labels(l.to_vec()),
        None => Ok(e),
    }
}

/// `n_points` uniform samples of the RGB unit cube.
pub fn gen_rgb_cube<R: Rng + ?Sized>(n_points: usize, rng: &mut R) -> Matrix {
    let rows: Vec<[f64; 3]> = (0..n_points)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    Matrix::from_rows(&rows).expect("fixed width")
}

/// Default base for Experiment C: a Gaussian mixture of `n_clusters`
/// isotropic blobs in `dim` dimensions, paired with a 2-D layout that keeps
/// each blob together on a ring (the role a good t-SNE map plays).
pub fn gaussian_mixture_base<R: Rng + ?Sized>(
    n_points: usize,
    n_clusters: usize,
    dim: usize,
    rng: &mut R,
) -> Result<PairedEmbedding> {
    if n_clusters == 0 || dim < 2 || n_points < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "mixture needs clusters >= 1, dim >= 2 and N >= 2 (got {n_clusters}, {dim}, {n_points})"
        )));
    }
    let centers: Vec<Vec<f64>> = (0..n_clusters)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let mut high = Vec::with_capacity(n_points);
    let mut low = Vec::with_capacity(n_points);
    let mut labels = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let c = i % n_clusters;
        let offset: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        high.push(centers[c].iter().zip(&offset).map(|(a, b)| a + b).collect::<Vec<f64>>());
        let a = 2.0 * PI * c as f64 / n_clusters as f64;
        low.push([12.0 * cos(a) + 0.8 * offset[0], 12.0 * sin(a) + 0.8 * offset[1]]);
        labels.push(c as i64);
    }
    PairedEmbedding::new(Matrix::from_rows(&high)?, Matrix::from_rows(&low)?)?.with_labels(labels)
}

/// Neighborhood sizes of the Experiment D schedule: 4..=9, then 10..=90 by 10.
pub fn experiment_d_neighbors() -> Vec<usize> {
    (4..10).chain((10..=90).step_by(10)).collect()
}

/// Stand-in for a projection family that turns from local to global as the
/// neighborhood size grows: a fixed linear view of the cube whose Voronoi
/// cells (around `n_cells` random sites) are torn apart by displacements of
/// length `0.6 · 4 / n_neighbors`. Sites and directions come from `rng`, so
/// reusing a stream varies only the tearing strength.
pub fn gen_global_family<R: Rng + ?Sized>(
    cube: &Matrix,
    n_neighbors: usize,
    n_cells: usize,
    rng: &mut R,
) -> Result<Matrix> {
    if n_neighbors == 0 || n_cells == 0 || cube.cols() != 3 {
        return Err(Error::InvalidParameter(
            "needs a 3-column cube, n_neighbors >= 1 and n_cells >= 1".into(),
        ));
    }
    let sites: Vec<[f64; 3]> = (0..n_cells)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    let dirs: Vec<[f64; 2]> = (0..n_cells)
        .map(|_| {
            let t = 2.0 * PI * rng.random::<f64>();
            [cos(t), sin(t)]
        })
        .collect();
    let amp = 0.6 * 4.0 / n_neighbors as f64;
    let rows: Vec<[f64; 2]> = cube
        .iter_rows()
        .map(|p| {
            let cell = (0..n_cells)
                .min_by(|&a, &b| {
                    crate::math::squared_euclidean(p, &sites[a])
                        .total_cmp(&crate::math::squared_euclidean(p, &sites[b]))
                })
                .unwrap_or(0);
            [
                p[0] + 0.5 * p[2] + amp * dirs[cell][0],
                p[1] + 0.3 * p[2] + amp * dirs[cell][1],
            ]
        })
        .collect();
    Matrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RngStream;

    fn centers(e: &PairedEmbedding, per: usize, groups: usize) -> Vec<[f64; 2]> {
        (0..groups)
            .map(|g| {
                let rows = g * per..(g + 1) * per;
                let k = rows.len() as f64;
                let (mut x, mut y) = (0.0, 0.0);
                for r in rows {
                    x += e.projected().get(r, 0);
                    y += e.projected().get(r, 1);
                }
                [x / k, y / k]
            })
            .collect()
    }

    #[test]
    fn experiment_a_layouts() {
        let e = gen_experiment_a(60.0, 50, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(e.n_points(), 300);
        assert_eq!(e.original().cols(), SPHERE_DIM);
        // disk memberships: any two points of different disks are farther than 0
        let c = centers(&e, 50, 6);
        for a in 0..6 {
            for b in a + 1..6 {
                let d = sqrt(crate::math::squared_euclidean(&c[a], &c[b]));
                assert!(d > 2.0 * disk_radius() + 3.0, "{a} {b} {d}");
            }
        }
        let z = gen_experiment_a(0.0, 50, &mut RngStream::new(1, 0)).unwrap();
        let c = centers(&z, 50, 6);
        for p in 0..3 {
            let d = sqrt(crate::math::squared_euclidean(&c[2 * p], &c[2 * p + 1]));
            assert!(d < 0.2, "{d}");
        }
        assert_eq!(z.original(), e.original());
        assert!(gen_experiment_a(61.0, 5, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn sphere_points_lie_on_spheres() {
        let e = gen_experiment_b(30.0, 20, &mut RngStream::new(2, 0)).unwrap();
        for (i, row) in e.original().iter_rows().enumerate() {
            let s = i / 20;
            let mut center = alloc::vec![0.0; SPHERE_DIM];
            center[s] = RING_RADIUS;
            let r = sqrt(crate::math::squared_euclidean(row, &center));
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn experiment_b_touches_at_ten_degrees() {
        let r = disk_radius();
        let gap = |deg: f64| 2.0 * RING_RADIUS * sin((deg / 2.0).to_radians());
        assert!((gap(10.0) - 2.0 * r).abs() < 1e-12);
        let e = gen_experiment_b(30.0, 40, &mut RngStream::new(3, 0)).unwrap();
        let c = centers(&e, 20, 12);
        // twelve evenly spaced disks
        for a in 0..12 {
            let b = (a + 1) % 12;
            let d = sqrt(crate::math::squared_euclidean(&c[a], &c[b]));
            assert!((d - gap(30.0)).abs() < 0.3, "{a} {d}");
        }
        assert_eq!(
            gen_experiment_b(12.5, 40, &mut RngStream::new(3, 0)).unwrap().original(),
            e.original()
        );
    }

    #[test]
    fn experiment_c_rates() {
        let base = gaussian_mixture_base(200, 10, 8, &mut RngStream::new(4, 0)).unwrap();
        let same = gen_experiment_c(&base, 0.0, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(same, base);
        let all = gen_experiment_c(&base, 1.0, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(all.original(), base.original());
        assert!((0..200).all(|i| all.projected().row(i) != base.projected().row(i)));
        let half = gen_experiment_c(&base, 0.5, &mut RngStream::new(5, 0)).unwrap();
        let changed = (0..200).filter(|&i| half.projected().row(i) != base.projected().row(i)).count();
        assert_eq!(changed, 100);
        assert_eq!(half, gen_experiment_c(&base, 0.5, &mut RngStream::new(5, 0)).unwrap());
        assert!(gen_experiment_c(&base, 1.5, &mut RngStream::new(5, 0)).is_err());
    }

    #[test]
    fn rgb_cube_bounds_and_mean() {
        let cube = gen_rgb_cube(4000, &mut RngStream::new(6, 0));
        assert!(cube.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        // uniform on [0,1]: sd 1/sqrt(12), so 3 sigma of the mean is 3·0.2887/sqrt(4000)
        let bound = 3.0 * (1.0 / 12.0f64).sqrt() / 4000f64.sqrt();
        for c in 0..3 {
            let mean = cube.iter_rows().map(|r| r[c]).sum::<f64>() / 4000.0;
            assert!((mean - 0.5).abs() < bound, "{c} {mean}");
        }
        assert_eq!(cube, gen_rgb_cube(4000, &mut RngStream::new(6, 0)));
    }

    #[test]
    fn global_family_tears_less_with_more_neighbors() {
        let cube = gen_rgb_cube(300, &mut RngStream::new(7, 0));
        let a = gen_global_family(&cube, 4, 20, &mut RngStream::new(8, 0)).unwrap();
        let b = gen_global_family(&cube, 90, 20, &mut RngStream::new(8, 0)).unwrap();
        let base = gen_global_family(&cube, 1_000_000, 20, &mut RngStream::new(8, 0)).unwrap();
        let shift = |m: &Matrix| -> f64 {
            (0..300).map(|i| sqrt(crate::math::squared_euclidean(m.row(i), base.row(i)))).sum::<f64>()
        };
        assert!(shift(&a) > shift(&b));
        assert_eq!(experiment_d_neighbors().len(), 15);
    }
}
