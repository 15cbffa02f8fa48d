//! EDITER-style k-space EMI removal baselines.
//!
//! Both variants estimate, per temporal group of phase-encode lines, a
//! linear transfer kernel mapping shifted EMI-sensor k-space onto each
//! imaging coil, then subtract the fitted interference:
//!
//! * variant A: every PE line is its own group, kernel window
//!   delta_ky = 7, delta_kx = 1;
//! * variant B: groups are chosen by k-means over per-line single-tap
//!   transfer estimates (cluster count by best silhouette), window
//!   delta_ky = delta_kx = 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{ComplexArray2D, Domain, MultiCoilAcquisition};
use crate::error::{Error, Result};
use crate::linalg::{lstsq, LstsqSolver};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EditerVariant {
    A,
    B,
}

#[derive(Clone, Copy, Debug)]
pub struct EditerConfig {
    pub variant: EditerVariant,
    pub delta_kx: usize,
    pub delta_ky: usize,
    /// Largest cluster count the k-means search may pick (variant B).
    pub max_clusters: usize,
    pub rcond: f64,
}

impl EditerConfig {
    /// One PE line per temporal group, delta_ky = 7, delta_kx = 1.
    pub fn variant_a() -> Self {
        Self {
            variant: EditerVariant::A,
            delta_kx: 1,
            delta_ky: 7,
            max_clusters: 10,
            rcond: 1e-10,
        }
    }

    /// k-means grouping, delta_ky = 1, delta_kx = 1.
    pub fn variant_b() -> Self {
        Self {
            variant: EditerVariant::B,
            delta_kx: 1,
            delta_ky: 1,
            max_clusters: 10,
            rcond: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_kx == 0 || self.delta_kx.is_multiple_of(2) || self.delta_ky == 0 || self.delta_ky.is_multiple_of(2) {
            return Err(Error::invalid(
                "shift windows must be positive odd counts (centered windows)",
            ));
        }
        if self.max_clusters == 0 {
            return Err(Error::invalid("max_clusters must be positive"));
        }
        if !(self.rcond > 0.0 && self.rcond < 1.0) {
            return Err(Error::invalid("rcond outside (0, 1)"));
        }
        Ok(())
    }
}

/// Assignment of every PE line to exactly one group, ids contiguous from 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalGrouping {
    assignment: Vec<usize>,
    group_count: usize,
}

impl TemporalGrouping {
    fn from_labels(labels: Vec<usize>) -> Self {
        // relabel by first occurrence so ids are contiguous from 0
        let mut remap: Vec<Option<usize>> = vec![None; labels.len() + 1];
        let mut next = 0;
        let assignment: Vec<usize> = labels
            .into_iter()
            .map(|l| {
                *remap[l].get_or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                })
            })
            .collect();
        Self {
            assignment,
            group_count: next,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    /// Line indices per group, in ascending line order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.group_count];
        for (line, &g) in self.assignment.iter().enumerate() {
            groups[g].push(line);
        }
        groups
    }
}

/// Every PE line becomes its own temporal group.
pub fn assign_groups_fixed(ky: usize) -> TemporalGrouping {
    TemporalGrouping {
        assignment: (0..ky).collect(),
        group_count: ky,
    }
}

/// Groups PE lines by k-means over per-line single-tap transfer estimates
/// (one complex coefficient per sensor, least squares within the line).
/// The cluster count is picked by the best mean silhouette over
/// 2..=max_clusters; if even the best silhouette is weak (< 0.2) all lines
/// fall into a single group.
pub fn assign_groups_kmeans(
    coil_ksp: &ComplexArray2D,
    sensor_ksp: &[&ComplexArray2D],
    max_clusters: usize,
    rcond: f64,
) -> Result<TemporalGrouping> {
    let (kx, ky) = coil_ksp.shape();
    for s in sensor_ksp {
        if s.shape() != (kx, ky) {
            return Err(Error::shape("sensor k-space shape differs from coil"));
        }
    }
    if ky < 2 || sensor_ksp.is_empty() {
        return Ok(TemporalGrouping {
            assignment: vec![0; ky],
            group_count: 1,
        });
    }

    let features: Vec<Vec<f64>> = (0..ky)
        .map(|j| {
            let design = DMatrix::from_fn(kx, sensor_ksp.len(), |i, s| sensor_ksp[s].get(i, j));
            let rhs = DVector::from_fn(kx, |i, _| coil_ksp.get(i, j));
            let h = lstsq(design, &rhs, rcond)?;
            Ok(h.iter().flat_map(|c| [c.re, c.im]).collect())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TemporalGrouping::from_labels(kmeans_best(
        &features,
        max_clusters.min(ky),
    )))
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Deterministic farthest-point seeding followed by Lloyd iterations.
fn kmeans_run(features: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = features.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    // seed with the largest-norm point, then repeatedly the point farthest
    // from its nearest center; ties break toward the lowest index
    let first = (0..n)
        .max_by(|&p, &q| {
            let np: f64 = features[p].iter().map(|v| v * v).sum();
            let nq: f64 = features[q].iter().map(|v| v * v).sum();
            np.partial_cmp(&nq).unwrap().then(std::cmp::Ordering::Greater)
        })
        .unwrap();
    centers.push(features[first].clone());
    while centers.len() < k {
        let next = (0..n)
            .max_by(|&p, &q| {
                let dp = centers.iter().map(|c| dist2(&features[p], c)).fold(f64::MAX, f64::min);
                let dq = centers.iter().map(|c| dist2(&features[q], c)).fold(f64::MAX, f64::min);
                dp.partial_cmp(&dq).unwrap().then(std::cmp::Ordering::Greater)
            })
            .unwrap();
        centers.push(features[next].clone());
    }

    let dims = features[0].len();
    let mut assignment = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, f) in features.iter().enumerate() {
            let best = (0..k)
                .min_by(|&p, &q| {
                    dist2(f, &centers[p]).partial_cmp(&dist2(f, &centers[q])).unwrap()
                })
                .unwrap();
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = features
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == c)
                .map(|(f, _)| f)
                .collect();
            if members.is_empty() {
                continue; // empty cluster keeps its center
            }
            let mut mean = vec![0.0; dims];
            for m in &members {
                for (acc, v) in mean.iter_mut().zip(m.iter()) {
                    *acc += v;
                }
            }
            for v in &mut mean {
                *v /= members.len() as f64;
            }
            *center = mean;
        }
    }
    assignment
}

fn mean_silhouette(features: &[Vec<f64>], assignment: &[usize], k: usize) -> f64 {
    let n = features.len();
    let mut total = 0.0;
    for i in 0..n {
        let own = assignment[i];
        let mut within = 0.0;
        let mut within_count = 0usize;
        let mut between = vec![(0.0, 0usize); k];
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dist2(&features[i], &features[j]).sqrt();
            if assignment[j] == own {
                within += d;
                within_count += 1;
            } else {
                let slot = &mut between[assignment[j]];
                slot.0 += d;
                slot.1 += 1;
            }
        }
        if within_count == 0 {
            continue; // singleton contributes 0
        }
        let a = within / within_count as f64;
        let b = between
            .iter()
            .filter(|(_, c)| *c > 0)
            .map(|(s, c)| s / *c as f64)
            .fold(f64::MAX, f64::min);
        if b == f64::MAX {
            continue;
        }
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

const MIN_SILHOUETTE: f64 = 0.2;

fn kmeans_best(features: &[Vec<f64>], max_k: usize) -> Vec<usize> {
    let n = features.len();
    // features that coincide up to solver rounding form one group; the
    // silhouette is scale-invariant and would otherwise cluster the noise
    let max_norm = features
        .iter()
        .map(|f| f.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let spread = features
        .iter()
        .flat_map(|f| features.first().map(|g| dist2(f, g).sqrt()))
        .fold(0.0, f64::max);
    if spread <= 1e-9 * (1.0 + max_norm) {
        return vec![0; n];
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for k in 2..=max_k.min(n) {
        let assignment = kmeans_run(features, k);
        let score = mean_silhouette(features, &assignment, k);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, assignment));
        }
    }
    match best {
        Some((score, assignment)) if score >= MIN_SILHOUETTE => assignment,
        _ => vec![0; n],
    }
}

/// Complex transfer coefficients over the sensor/shift window,
/// sensor-major, then delta_ky shifts, then delta_kx shifts.
#[derive(Clone, Debug)]
pub struct TransferKernel {
    coeffs: Vec<Complex64>,
    sensors: usize,
    delta_kx: usize,
    delta_ky: usize,
}

impl TransferKernel {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, sensor: usize, dky_index: usize, dkx_index: usize) -> Complex64 {
        self.coeffs[(sensor * self.delta_ky + dky_index) * self.delta_kx + dkx_index]
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }
}

/// Design matrix for one group: one column per (sensor, delta_ky shift,
/// delta_kx shift), rows are the group's lines stacked line-major. Shifts
/// index the full k-space array and are zero-filled beyond its edges.
fn build_design(
    sensors: &[&ComplexArray2D],
    lines: &[usize],
    delta_kx: usize,
    delta_ky: usize,
) -> DMatrix<Complex64> {
    let (kx, ky) = sensors[0].shape();
    let hx = (delta_kx / 2) as isize;
    let hy = (delta_ky / 2) as isize;
    let rows = lines.len() * kx;
    let cols = sensors.len() * delta_kx * delta_ky;
    let mut m = DMatrix::zeros(rows, cols);
    let mut col = 0;
    for sensor in sensors {
        for dy in -hy..=hy {
            for dx in -hx..=hx {
                for (li, &line) in lines.iter().enumerate() {
                    let j = line as isize + dy;
                    if j < 0 || j >= ky as isize {
                        continue;
                    }
                    for x in 0..kx as isize {
                        let sx = x + dx;
                        if sx < 0 || sx >= kx as isize {
                            continue;
                        }
                        m[(li * kx + x as usize, col)] = sensor.get(sx as usize, j as usize);
                    }
                }
                col += 1;
            }
        }
    }
    m
}

fn stack_lines(coil: &ComplexArray2D, lines: &[usize]) -> DVector<Complex64> {
    let kx = coil.rows();
    DVector::from_fn(lines.len() * kx, |i, _| coil.get(i % kx, lines[i / kx]))
}

/// Least-squares transfer kernel of one temporal group.
pub fn estimate_group_kernel(
    coil: &ComplexArray2D,
    sensors: &[&ComplexArray2D],
    lines: &[usize],
    delta_kx: usize,
    delta_ky: usize,
    rcond: f64,
) -> Result<TransferKernel> {
    if lines.is_empty() {
        return Err(Error::invalid("temporal group without any PE line"));
    }
    for s in sensors {
        if s.shape() != coil.shape() {
            return Err(Error::shape("sensor k-space shape differs from coil"));
        }
    }
    let design = build_design(sensors, lines, delta_kx, delta_ky);
    let rhs = stack_lines(coil, lines);
    let coeffs = lstsq(design, &rhs, rcond)?;
    Ok(TransferKernel {
        coeffs: coeffs.iter().cloned().collect(),
        sensors: sensors.len(),
        delta_kx,
        delta_ky,
    })
}

/// Removes the fitted interference from every imaging coil of every repeat.
/// Output stays in k-space with the same shape.
pub fn correct_kspace(
    acq: &MultiCoilAcquisition,
    cfg: &EditerConfig,
) -> Result<MultiCoilAcquisition> {
    cfg.validate()?;
    if acq.domain() != Domain::KSpace {
        return Err(Error::invalid("EDITER operates on k-space acquisitions"));
    }
    let mut out = acq.clone();
    if acq.sensor_channels() == 0 {
        return Ok(out);
    }
    let kx = acq.kx();
    for r in 0..acq.repeats() {
        let sensors: Vec<&ComplexArray2D> = acq.sensors_of(r);
        let corrected: Vec<ComplexArray2D> = (0..acq.imaging_channels())
            .into_par_iter()
            .map(|c| {
                let coil = acq.imaging(r, c);
                let grouping = match cfg.variant {
                    EditerVariant::A => assign_groups_fixed(acq.ky()),
                    EditerVariant::B => {
                        assign_groups_kmeans(coil, &sensors, cfg.max_clusters, cfg.rcond)?
                    }
                };
                let mut fixed = coil.clone();
                for lines in grouping.groups() {
                    let design = build_design(&sensors, &lines, cfg.delta_kx, cfg.delta_ky);
                    let rhs = stack_lines(coil, &lines);
                    let solver = LstsqSolver::new(design.clone(), cfg.rcond)?;
                    if solver.rank() == 0 {
                        continue;
                    }
                    let kernel = solver.solve(&rhs);
                    let emi = design * kernel;
                    for (li, &line) in lines.iter().enumerate() {
                        for x in 0..kx {
                            let v = fixed.get(x, line) - emi[li * kx + x];
                            fixed.set(x, line, v);
                        }
                    }
                }
                Ok(fixed)
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, arr) in corrected.into_iter().enumerate() {
            out.set_channel(r, c, arr)?;
        }
    }
    Ok(out)
}
