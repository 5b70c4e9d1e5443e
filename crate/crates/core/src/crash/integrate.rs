//! Central-difference (velocity Verlet) integration of a crush chain.
//!
//! Coordinates are displacements along the crush axis, positive toward the
//! barrier. Node 0 is the moving barrier when there is one; vehicle masses
//! follow. Cell `c_1` is compressed by `u_1 − u_wall` (or `u_1 − u_barrier`
//! in series with the barrier face), cell `c_i` by `u_i − u_{i−1}`.

use serde::Serialize;

use super::chain::{series_force, Barrier, CellState, CrushChain};
use crate::error::{Error, Result};
use crate::model::G;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Time step; `None` selects it from the chain's stiffest mode.
    pub dt: Option<f64>,
    pub duration: f64,
    pub output_interval: f64,
    /// Relative energy growth that aborts the run.
    pub growth_limit: f64,
    /// Channel frequency class of the filter applied to the passenger
    /// deceleration before its peak is taken; `None` reports the raw peak.
    pub cfc: Option<f64>,
}

impl IntegrateOptions {
    pub fn new(duration: f64, output_interval: f64) -> Self {
        Self {
            dt: None,
            duration,
            output_interval,
            growth_limit: 0.01,
            cfc: Some(60.0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergySample {
    pub kinetic: f64,
    /// Elastic energy stored in the vehicle cells.
    pub elastic: f64,
    /// Plastic work in the vehicle cells.
    pub dissipated: f64,
    /// Elastic plus plastic energy of the barrier face.
    pub barrier: f64,
}

impl EnergySample {
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic + self.dissipated + self.barrier
    }

    pub fn internal(&self) -> f64 {
        self.elastic + self.dissipated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistorySample {
    pub time: f64,
    /// Vehicle masses `m_1..m_n`.
    pub displacement: Vec<f64>,
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    /// Passenger-mass acceleration after the channel filter.
    pub filtered_acceleration: f64,
    /// Vehicle cells `c_1..c_n`: force (N) and compression (m).
    pub cell_force: Vec<f64>,
    pub cell_crush: Vec<f64>,
    /// Barrier contact force, N.
    pub barrier_force: f64,
    pub intrusion: f64,
    pub energy: EnergySample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashHistories {
    pub dt: f64,
    pub steps: usize,
    pub initial_energy: f64,
    pub samples: Vec<HistorySample>,
    /// Extremes tracked every step, not only at output samples.
    pub max_intrusion: f64,
    pub max_intrusion_time: f64,
    /// Peak passenger-cell deceleration after the channel filter, m/s².
    pub peak_deceleration: f64,
    pub peak_deceleration_time: f64,
    /// Unfiltered peak, m/s².
    pub peak_deceleration_raw: f64,
    pub max_intrusion_velocity: f64,
    /// ∫ contact force dt, N·s.
    pub contact_impulse: f64,
    /// Largest relative energy imbalance seen at any step.
    pub max_imbalance: f64,
}

/// Gershgorin bound on the highest circular frequency of the elastic chain.
pub fn max_frequency(chain: &CrushChain) -> f64 {
    let n = chain.n_cells();
    let k: Vec<f64> = chain.cells.iter().map(|c| c.stiffness).collect();
    let mut w2: f64 = 0.0;
    let k1_eff = match &chain.barrier {
        Barrier::Rigid => k[0],
        Barrier::Moving { mass, face } => {
            let series = 1.0 / (1.0 / k[0] + 1.0 / face.stiffness);
            w2 = w2.max(2.0 * series / mass);
            series
        }
    };
    for i in 0..n {
        let front = if i == 0 { k1_eff } else { k[i] };
        let back = if i + 1 < n { k[i + 1] } else { 0.0 };
        let neighbor_front = if i == 0 && matches!(chain.barrier, Barrier::Rigid) {
            0.0
        } else {
            front
        };
        w2 = w2.max((front + back + neighbor_front + back) / chain.masses[i]);
    }
    w2.sqrt()
}

/// `min(0.8 · 2/ω_max, 2π/(100 ω_max), 10 µs)`.
pub fn stable_time_step(chain: &CrushChain) -> f64 {
    let w = max_frequency(chain);
    (0.8 * 2.0 / w).min(2.0 * std::f64::consts::PI / (100.0 * w)).min(1e-5)
}

struct State<'a> {
    chain: &'a CrushChain,
    moving: bool,
    /// Node masses: barrier (if moving) then vehicle.
    mass: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    cells: Vec<CellState>,
    face: CellState,
}

impl<'a> State<'a> {
    fn new(chain: &'a CrushChain) -> Self {
        let moving = matches!(chain.barrier, Barrier::Moving { .. });
        let mut mass = Vec::new();
        let mut v = Vec::new();
        if let Barrier::Moving { mass: mb, .. } = &chain.barrier {
            mass.push(*mb);
            v.push(-chain.barrier_speed);
        }
        mass.extend_from_slice(&chain.masses);
        v.extend(std::iter::repeat_n(chain.vehicle_speed, chain.masses.len()));
        let n = mass.len();
        Self {
            chain,
            moving,
            mass,
            u: vec![0.0; n],
            v,
            a: vec![0.0; n],
            cells: vec![CellState::default(); chain.n_cells()],
            face: CellState::default(),
        }
    }

    fn off(&self) -> usize {
        usize::from(self.moving)
    }

    fn crush(&self, i: usize) -> f64 {
        let o = self.off();
        let front = if i == 0 {
            if self.moving {
                self.u[0]
            } else {
                0.0
            }
        } else {
            self.u[o + i - 1]
        };
        self.u[o + i] - front
    }

    fn crush_rate(&self, i: usize) -> f64 {
        let o = self.off();
        let front = if i == 0 {
            if self.moving {
                self.v[0]
            } else {
                0.0
            }
        } else {
            self.v[o + i - 1]
        };
        self.v[o + i] - front
    }

    /// Updates cell forces (committing plastic flow) and accelerations.
    fn forces(&mut self) -> f64 {
        let chain = self.chain;
        let n = chain.n_cells();
        let mut f = vec![0.0; n];
        for i in 0..n {
            let rate = self.crush_rate(i).abs() / chain.cells[i].length;
            let total = self.crush(i);
            if i == 0 {
                if let Barrier::Moving { face, .. } = &chain.barrier {
                    let mut st = [self.face, self.cells[0]];
                    f[0] = series_force(&[face, &chain.cells[0]], &mut st, &[0.0, rate], total);
                    self.face = st[0];
                    self.cells[0] = st[1];
                    continue;
                }
            }
            let mut st = [self.cells[i]];
            f[i] = series_force(&[&chain.cells[i]], &mut st, &[rate], total);
            self.cells[i] = st[0];
        }
        let contact = f[0];
        let o = self.off();
        if self.moving {
            self.a[0] = f[0] / self.mass[0];
        }
        for i in 0..n {
            let behind = if i + 1 < n { f[i + 1] } else { 0.0 };
            self.a[o + i] = (behind - f[i]) / self.mass[o + i];
        }
        contact
    }

    fn energy(&self) -> EnergySample {
        let kinetic = self.mass.iter().zip(&self.v).map(|(m, v)| 0.5 * m * v * v).sum();
        let elastic = self
            .cells
            .iter()
            .zip(&self.chain.cells)
            .map(|(s, c)| s.elastic_energy(c))
            .sum();
        let dissipated = self.cells.iter().map(|s| s.dissipated).sum();
        let barrier = match &self.chain.barrier {
            Barrier::Rigid => 0.0,
            Barrier::Moving { face, .. } => self.face.elastic_energy(face) + self.face.dissipated,
        };
        EnergySample {
            kinetic,
            elastic,
            dissipated,
            barrier,
        }
    }

    /// Compression of cell `i` alone; the first cell of a moving-barrier
    /// chain shares its gap with the barrier face.
    fn cell_crush(&self, i: usize) -> f64 {
        if i == 0 && self.moving {
            let s = &self.cells[0];
            s.plastic + s.force / self.chain.cells[0].stiffness
        } else {
            self.crush(i)
        }
    }

    fn intrusion(&self) -> f64 {
        let n = self.chain.n_cells();
        (n - self.chain.intrusion_cells..n).map(|i| self.cell_crush(i)).sum()
    }

    fn sample(&self, time: f64) -> HistorySample {
        let o = self.off();
        let n = self.chain.n_cells();
        HistorySample {
            time,
            displacement: self.u[o..].to_vec(),
            velocity: self.v[o..].to_vec(),
            acceleration: self.a[o..].to_vec(),
            filtered_acceleration: 0.0,
            cell_force: self.cells.iter().map(|s| s.force).collect(),
            cell_crush: (0..n).map(|i| self.cell_crush(i)).collect(),
            barrier_force: self.cells[0].force,
            intrusion: self.intrusion(),
            energy: self.energy(),
        }
    }
}

/// Integrates the chain over `opts.duration`. The step is shrunk so that
/// the output interval is an exact multiple of it. Aborts with
/// `Error::Unstable` once the energy ledger grows by more than
/// `opts.growth_limit` of the initial kinetic energy.
pub fn explicit_integrate(chain: &CrushChain, opts: &IntegrateOptions) -> Result<CrashHistories> {
    if !(opts.duration > 0.0 && opts.output_interval > 0.0) {
        return Err(Error::invalid(
            "integration window",
            "duration and output interval must be > 0",
        ));
    }
    if let Some(cfc) = opts.cfc {
        if !(cfc > 0.0) {
            return Err(Error::invalid("filter class", format!("{cfc} must be > 0")));
        }
    }
    let dt_target = match opts.dt {
        Some(dt) if dt > 0.0 && dt.is_finite() => dt,
        Some(dt) => return Err(Error::invalid("time step", format!("{dt} must be > 0"))),
        None => stable_time_step(chain),
    };
    let per_output = (opts.output_interval / dt_target).ceil().max(1.0) as usize;
    let dt = opts.output_interval / per_output as f64;
    let n_out = (opts.duration / opts.output_interval).round() as usize;
    let steps = n_out * per_output;

    let mut s = State::new(chain);
    let e0 = chain.initial_kinetic_energy();
    s.forces();
    let passenger = s.mass.len() - 1;

    let mut h = CrashHistories {
        dt,
        steps,
        initial_energy: e0,
        samples: Vec::with_capacity(n_out + 1),
        max_intrusion: 0.0,
        max_intrusion_time: 0.0,
        peak_deceleration: 0.0,
        peak_deceleration_time: 0.0,
        peak_deceleration_raw: 0.0,
        max_intrusion_velocity: 0.0,
        contact_impulse: 0.0,
        max_imbalance: 0.0,
    };
    h.samples.push(s.sample(0.0));
    let mut passenger_accel = Vec::with_capacity(steps + 1);
    passenger_accel.push(s.a[passenger]);
    let mut prev_contact = s.cells[0].force;
    let mut prev_intrusion = s.intrusion();

    for step in 1..=steps {
        let t = step as f64 * dt;
        for i in 0..s.mass.len() {
            s.v[i] += 0.5 * dt * s.a[i];
            s.u[i] += dt * s.v[i];
        }
        let contact = s.forces();
        for i in 0..s.mass.len() {
            s.v[i] += 0.5 * dt * s.a[i];
        }
        h.contact_impulse += 0.5 * dt * (prev_contact + contact);
        prev_contact = contact;

        let intrusion = s.intrusion();
        if intrusion > h.max_intrusion {
            h.max_intrusion = intrusion;
            h.max_intrusion_time = t;
        }
        passenger_accel.push(s.a[passenger]);
        h.peak_deceleration_raw = h.peak_deceleration_raw.max(s.a[passenger].abs());
        h.max_intrusion_velocity = h.max_intrusion_velocity.max(((intrusion - prev_intrusion) / dt).abs());
        prev_intrusion = intrusion;

        if e0 > 0.0 {
            let e = s.energy().total();
            let imbalance = (e - e0).abs() / e0;
            h.max_imbalance = h.max_imbalance.max(imbalance);
            if (e - e0) / e0 > opts.growth_limit || !e.is_finite() {
                return Err(Error::Unstable {
                    growth: 100.0 * (e - e0) / e0,
                    time: t,
                });
            }
        }
        if step % per_output == 0 {
            h.samples.push(s.sample(t));
        }
    }
    let filtered = match opts.cfc {
        Some(cfc) => cfc_filter(&passenger_accel, dt, cfc)?,
        None => passenger_accel,
    };
    for (i, a) in filtered.iter().enumerate() {
        if a.abs() > h.peak_deceleration {
            h.peak_deceleration = a.abs();
            h.peak_deceleration_time = i as f64 * dt;
        }
    }
    for (k, sample) in h.samples.iter_mut().enumerate() {
        sample.filtered_acceleration = filtered[k * per_output];
    }
    Ok(h)
}

/// Phaseless channel filter of the crash-test data-acquisition practice:
/// a two-pole Butterworth low-pass run forward and then backward, giving a
/// four-pole response with corner at 2.0775·`cfc` Hz. The filter state
/// starts from the signal's end value on each pass.
pub fn cfc_filter(x: &[f64], dt: f64, cfc: f64) -> Result<Vec<f64>> {
    let wd = 2.0 * std::f64::consts::PI * cfc * 2.0775;
    let half = wd * dt / 2.0;
    if !(half < 0.45 * std::f64::consts::PI) {
        return Err(Error::invalid(
            "filter class",
            format!("sampling interval {dt} s too coarse for class {cfc}"),
        ));
    }
    let wa = half.tan();
    let den = 1.0 + std::f64::consts::SQRT_2 * wa + wa * wa;
    let a0 = wa * wa / den;
    let (a1, a2) = (2.0 * a0, a0);
    let b1 = -2.0 * (wa * wa - 1.0) / den;
    let b2 = (-1.0 + std::f64::consts::SQRT_2 * wa - wa * wa) / den;
    let pass = |input: &mut dyn Iterator<Item = f64>| -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        let mut it = input.peekable();
        let Some(&first) = it.peek() else {
            return out;
        };
        let (mut x1, mut x2, mut y1, mut y2) = (first, first, first, first);
        for v in it {
            let y = a0 * v + a1 * x1 + a2 * x2 + b1 * y1 + b2 * y2;
            x2 = x1;
            x1 = v;
            y2 = y1;
            y1 = y;
            out.push(y);
        }
        out
    };
    let forward = pass(&mut x.iter().copied());
    let mut back = pass(&mut forward.iter().rev().copied());
    back.reverse();
    Ok(back)
}

/// Largest `|KE + internal + barrier − KE₀| / KE₀` over the output samples.
pub fn energy_audit(h: &CrashHistories) -> f64 {
    if h.initial_energy <= 0.0 {
        return 0.0;
    }
    h.samples
        .iter()
        .map(|s| (s.energy.total() - h.initial_energy).abs() / h.initial_energy)
        .fold(0.0, f64::max)
}

/// Peak passenger deceleration in g's.
pub fn peak_g(h: &CrashHistories) -> f64 {
    h.peak_deceleration / G
}

#[cfg(test)]
mod tests {
    use super::super::chain::{CrushCell, Plateau};
    use super::super::Scenario;
    use super::*;

    #[test]
    fn filter_passes_slow_and_removes_fast() {
        let dt = 1e-5;
        let slow: Vec<f64> = (0..20_000)
            .map(|i| (2.0 * std::f64::consts::PI * 5.0 * i as f64 * dt).sin())
            .collect();
        let f = cfc_filter(&slow, dt, 60.0).unwrap();
        let err = slow
            .iter()
            .zip(&f)
            .skip(2000)
            .take(16_000)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        let fast: Vec<f64> = (0..20_000)
            .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 * dt).sin())
            .collect();
        let f = cfc_filter(&fast, dt, 60.0).unwrap();
        let amp = f.iter().skip(2000).take(16_000).map(|a| a.abs()).fold(0.0, f64::max);
        assert!(amp < 0.01, "{amp}");
        let c = vec![3.0; 100];
        assert!(cfc_filter(&c, dt, 60.0).unwrap().iter().all(|v| (v - 3.0).abs() < 1e-9));
    }

    fn single(m: f64, k: f64, plateau: f64, v0: f64) -> CrushChain {
        CrushChain {
            scenario: Scenario::Frontal,
            masses: vec![m],
            cells: vec![CrushCell {
                length: 10.0,
                stiffness: k,
                plateau: Plateau::Fixed(plateau),
                densification: 0.7,
            }],
            barrier: Barrier::Rigid,
            vehicle_speed: v0,
            barrier_speed: 0.0,
            angle_deg: 0.0,
            intrusion_cells: 1,
        }
    }

    #[test]
    fn elastic_half_sine() {
        let (m, k, v0) = (1000.0, 1e6, 10.0);
        let c = single(m, k, 1e12, v0);
        let h = explicit_integrate(&c, &IntegrateOptions::new(0.2, 1e-4)).unwrap();
        for peak in [h.peak_deceleration, h.peak_deceleration_raw] {
            assert!((peak * m / (v0 * (k * m).sqrt()) - 1.0).abs() < 0.01);
        }
        assert!(energy_audit(&h) < 0.005);
        // rebound: exit velocity −v0, impulse 2 m v0
        assert!((h.contact_impulse / (2.0 * m * v0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_speed_is_quiet() {
        let c = single(1000.0, 1e6, 1e5, 0.0);
        let h = explicit_integrate(&c, &IntegrateOptions::new(0.01, 1e-3)).unwrap();
        assert!(h
            .samples
            .iter()
            .all(|s| s.displacement[0] == 0.0 && s.cell_force[0] == 0.0));
    }

    #[test]
    fn oversized_step_is_caught() {
        let c = single(1.0, 1e6, 1e12, 1.0);
        let opts = IntegrateOptions {
            dt: Some(1e-2),
            ..IntegrateOptions::new(0.5, 1e-2)
        };
        assert!(matches!(explicit_integrate(&c, &opts), Err(Error::Unstable { .. })));
    }
}
