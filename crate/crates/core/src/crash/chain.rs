//! Crush-chain construction and the elastic-plastic cell law.

use serde::Serialize;

use super::{BarrierSpec, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::material::{crush_law, CrushLaw};
use crate::model::FrameModel;

/// Lock-up begins at this fraction of the densification crush.
const LOCKUP_ONSET: f64 = 0.8;
/// Plastic flow stops once the lock-up factor reaches this value; further
/// compression is elastic.
const LOCKUP_MAX_FACTOR: f64 = 10.0;
/// Crushable depth of a deformable barrier face, m.
pub const BARRIER_FACE_DEPTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Plateau {
    /// Rate-independent plateau force, N.
    Fixed(f64),
    /// Sum over crossing tubes of projected Johnson-Cook crush laws
    /// `(law, |cos θ|)`.
    Material(Vec<(CrushLaw, f64)>),
}

/// One compression-only elastic-plastic crush cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrushCell {
    /// Undeformed length along the crush axis, m.
    pub length: f64,
    /// Elastic (and unloading) stiffness, N/m.
    pub stiffness: f64,
    pub plateau: Plateau,
    /// Crush fraction of `length` at which the cell densifies.
    pub densification: f64,
}

impl CrushCell {
    /// Plateau force at a strain rate, N.
    pub fn plateau_force(&self, strain_rate: f64) -> f64 {
        match &self.plateau {
            Plateau::Fixed(f) => *f,
            Plateau::Material(laws) => laws.iter().map(|(law, c)| c * law.plateau(strain_rate)).sum(),
        }
    }

    /// Plateau at the reference rate, N.
    pub fn static_plateau(&self) -> f64 {
        self.plateau_force(0.0)
    }

    fn densification_crush(&self) -> f64 {
        self.densification * self.length
    }

    /// Largest plastic crush; beyond it the cell only deforms elastically.
    pub fn max_plastic(&self) -> f64 {
        let xd = self.densification_crush();
        let xo = LOCKUP_ONSET * xd;
        xd - (xd - xo) / LOCKUP_MAX_FACTOR
    }

    /// Flow force at plastic crush `p`: the plateau, stiffened
    /// hyperbolically once `p` passes the lock-up onset.
    pub fn yield_force(&self, plastic: f64, strain_rate: f64) -> f64 {
        let xd = self.densification_crush();
        let xo = LOCKUP_ONSET * xd;
        let factor = if plastic <= xo {
            1.0
        } else {
            ((xd - xo) / (xd - plastic).max(1e-12)).min(LOCKUP_MAX_FACTOR)
        };
        self.plateau_force(strain_rate) * factor
    }

    /// Static crush under a compressive force `f` from a virgin state:
    /// total compression (elastic plus plastic), m.
    pub fn static_crush(&self, f: f64) -> f64 {
        if f <= 0.0 {
            return 0.0;
        }
        let plateau = self.static_plateau();
        let elastic = f / self.stiffness;
        if f <= plateau {
            return elastic;
        }
        let xd = self.densification_crush();
        let xo = LOCKUP_ONSET * xd;
        let plastic = (xd - plateau * (xd - xo) / f).min(self.max_plastic());
        plastic + elastic
    }
}

/// Mutable state of a cell during integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CellState {
    /// Plastic crush, m.
    pub plastic: f64,
    /// Energy dissipated by plastic flow, J.
    pub dissipated: f64,
    /// Current force, N (compression positive).
    pub force: f64,
}

impl CellState {
    pub fn elastic_energy(&self, cell: &CrushCell) -> f64 {
        0.5 * self.force * self.force / cell.stiffness
    }
}

/// Force carried by cells in series under total compression `total`,
/// updating their plastic states by return mapping. Compression-only:
/// an opened gap carries no force.
pub fn series_force(cells: &[&CrushCell], states: &mut [CellState], rates: &[f64], total: f64) -> f64 {
    let compliance: f64 = cells.iter().map(|c| 1.0 / c.stiffness).sum();
    let plastic_sum = |s: &[CellState]| s.iter().map(|x| x.plastic).sum::<f64>();
    let mut f = (total - plastic_sum(states)) / compliance;
    if f <= 0.0 {
        for s in states.iter_mut() {
            s.force = 0.0;
        }
        return 0.0;
    }
    for _ in 0..cells.len() {
        let weakest = (0..cells.len())
            .filter(|&i| states[i].plastic < cells[i].max_plastic())
            .map(|i| (i, cells[i].yield_force(states[i].plastic, rates[i])))
            .filter(|&(_, y)| y < f)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((i, y)) = weakest else { break };
        let others: f64 = plastic_sum(states) - states[i].plastic;
        let target = (total - others - y * compliance).clamp(states[i].plastic, cells[i].max_plastic());
        states[i].dissipated += y * (target - states[i].plastic);
        states[i].plastic = target;
        f = (total - plastic_sum(states)) / compliance;
    }
    for s in states.iter_mut() {
        s.force = f;
    }
    f
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Barrier {
    Rigid,
    /// Moving barrier: mass and an elastic-plastic face in series with the
    /// first vehicle cell.
    Moving {
        mass: f64,
        face: CrushCell,
    },
}

/// Lumped masses `m_1..m_n` joined by cells `c_1..c_n`; `c_1` sits between
/// the barrier and `m_1`, `m_n` is the passenger cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrushChain {
    pub scenario: Scenario,
    pub masses: Vec<f64>,
    pub cells: Vec<CrushCell>,
    pub barrier: Barrier,
    /// Vehicle speed toward the barrier along the crush axis, m/s.
    pub vehicle_speed: f64,
    /// Barrier speed toward the vehicle along the crush axis, m/s.
    pub barrier_speed: f64,
    pub angle_deg: f64,
    /// Intrusion is the compression of this many rearmost cells.
    pub intrusion_cells: usize,
}

impl CrushChain {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vehicle_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn initial_kinetic_energy(&self) -> f64 {
        let vehicle = 0.5 * self.vehicle_mass() * self.vehicle_speed.powi(2);
        let barrier = match &self.barrier {
            Barrier::Rigid => 0.0,
            Barrier::Moving { mass, .. } => 0.5 * mass * self.barrier_speed.powi(2),
        };
        vehicle + barrier
    }

    /// Human-readable account of where intrusion is read.
    pub fn intrusion_location(&self) -> String {
        let n = self.n_cells();
        let first = n + 1 - self.intrusion_cells;
        if first == n {
            format!("compression of cell {n} of {n} (adjacent to the passenger cell)")
        } else {
            format!("compression of cells {first}..{n} of {n} (adjacent to the passenger cell)")
        }
    }
}

/// Reduces the scenario's member group to a crush chain. The group's
/// extent along the crush axis is split into `n_cells` equal cells; each
/// cell takes the members crossing its mid-plane, with plateau projected
/// by `|cos θ|` and stiffness `EA cos³θ / ℓ`.
pub fn build_chain(
    model: &FrameModel,
    scenario: Scenario,
    cfg: &ScenarioConfig,
    vehicle_mass: f64,
) -> Result<CrushChain> {
    if cfg.n_cells == 0 {
        return Err(Error::invalid("n_cells", "must be >= 1"));
    }
    if cfg.intrusion_cells == 0 || cfg.intrusion_cells > cfg.n_cells {
        return Err(Error::invalid("intrusion_cells", "must be in 1..=n_cells"));
    }
    if !(vehicle_mass > 0.0) {
        return Err(Error::invalid("vehicle mass", "must be > 0"));
    }
    let group = model.group(&cfg.group)?;
    if group.members.is_empty() {
        return Err(Error::invalid(
            format!("group {}", cfg.group),
            "crush path has no members",
        ));
    }
    let axis = scenario.crush_axis();
    let proj = |p: &[f64; 3]| axis[0] * p[0] + axis[1] * p[1] + axis[2] * p[2];

    struct Tube<'a> {
        s0: f64,
        s1: f64,
        cos: f64,
        member: &'a crate::model::MemberSpec,
    }
    let mut tubes = Vec::new();
    for &id in &group.members {
        let m = model
            .members
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| Error::invalid(format!("group {}", cfg.group), format!("unknown member {id}")))?;
        let a = model.node(m.node_i).ok_or(Error::UnknownNode(m.node_i))?;
        let b = model.node(m.node_j).ok_or(Error::UnknownNode(m.node_j))?;
        let (sa, sb) = (proj(&a.position), proj(&b.position));
        let len = model.member_length(m);
        if !(len > 0.0) {
            return Err(Error::ZeroLength(m.id));
        }
        tubes.push(Tube {
            s0: sa.min(sb),
            s1: sa.max(sb),
            cos: (sb - sa).abs() / len,
            member: m,
        });
    }
    let start = tubes.iter().map(|t| t.s0).fold(f64::INFINITY, f64::min);
    let end = tubes.iter().map(|t| t.s1).fold(f64::NEG_INFINITY, f64::max);
    if !(end - start > 1e-6) {
        return Err(Error::invalid(
            format!("group {}", cfg.group),
            "members have no extent along the crush axis",
        ));
    }
    let n = cfg.n_cells;
    let cell_len = (end - start) / n as f64;

    let mut cells = Vec::with_capacity(n);
    for k in 0..n {
        let mid = start + (k as f64 + 0.5) * cell_len;
        let mut laws = Vec::new();
        let mut stiffness = 0.0;
        for t in tubes.iter().filter(|t| t.s0 <= mid && t.s1 >= mid && t.cos > 1e-6) {
            let m = t.member;
            let section = model
                .sections
                .get(&m.section)
                .ok_or_else(|| Error::Validation(format!("member {}: unknown section", m.id)))?;
            let material = model
                .materials
                .get(&m.material)
                .ok_or_else(|| Error::Validation(format!("member {}: unknown material", m.id)))?;
            // the tube spans ℓ / cos θ inside the cell
            let law = crush_law(section, material, cell_len / t.cos, &cfg.crush)?;
            stiffness += law.stiffness * t.cos * t.cos;
            laws.push((law, t.cos));
        }
        if laws.is_empty() {
            return Err(Error::invalid(
                format!("group {}", cfg.group),
                format!("cell {} has no member crossing it along the crush axis", k + 1),
            ));
        }
        cells.push(CrushCell {
            length: cell_len,
            stiffness,
            plateau: Plateau::Material(laws),
            densification: cfg.crush.densification,
        });
    }

    let masses = distribute_mass(vehicle_mass, n, cfg.bumper_fraction, cfg.crush_zone_fraction);
    let normal = cfg.normal_speed();
    let (barrier, vehicle_speed, barrier_speed) = match cfg.barrier {
        BarrierSpec::Rigid => (Barrier::Rigid, normal, 0.0),
        BarrierSpec::Deformable {
            stiffness,
            mass,
            plateau_ratio,
        } => (
            Barrier::Moving {
                mass,
                face: CrushCell {
                    length: BARRIER_FACE_DEPTH,
                    stiffness,
                    plateau: Plateau::Fixed(plateau_ratio * cells[0].static_plateau()),
                    densification: cfg.crush.densification,
                },
            },
            0.0,
            normal,
        ),
    };
    Ok(CrushChain {
        scenario,
        masses,
        cells,
        barrier,
        vehicle_speed,
        barrier_speed,
        angle_deg: cfg.angle_deg,
        intrusion_cells: cfg.intrusion_cells,
    })
}

/// `m_1` takes the bumper share, `m_2..m_{n-1}` split the crush-zone
/// share, `m_n` carries the remainder. Sums to `total` exactly.
pub fn distribute_mass(total: f64, n: usize, bumper: f64, crush_zone: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![total],
        _ => {
            let mut m = vec![0.0; n];
            m[0] = bumper * total;
            if n > 2 {
                let each = crush_zone * total / (n - 2) as f64;
                for x in &mut m[1..n - 1] {
                    *x = each;
                }
            }
            let assigned: f64 = m[..n - 1].iter().sum();
            m[n - 1] = total - assigned;
            m
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elastic_plastic(k: f64, plateau: f64) -> CrushCell {
        CrushCell {
            length: 1.0,
            stiffness: k,
            plateau: Plateau::Fixed(plateau),
            densification: 0.7,
        }
    }

    #[test]
    fn mass_distribution_sums() {
        for n in 1..8 {
            let m = distribute_mass(1000.0, n, 0.03, 0.12);
            assert_eq!(m.len(), n);
            assert!((m.iter().sum::<f64>() - 1000.0).abs() < 1e-9);
        }
        assert_eq!(distribute_mass(1000.0, 1, 0.03, 0.12), vec![1000.0]);
    }

    #[test]
    fn single_cell_return_mapping() {
        let c = elastic_plastic(1e6, 1e4);
        let mut s = [CellState::default()];
        // elastic
        assert_eq!(series_force(&[&c], &mut s, &[0.0], 0.005), 5e3);
        // yields at the plateau
        let f = series_force(&[&c], &mut s, &[0.0], 0.05);
        assert!((f - 1e4).abs() < 1e-6);
        assert!((s[0].plastic - 0.04).abs() < 1e-12);
        // unloads elastically, then opens a gap
        let f = series_force(&[&c], &mut s, &[0.0], 0.045);
        assert!((f - 5e3).abs() < 1e-6);
        assert_eq!(series_force(&[&c], &mut s, &[0.0], 0.01), 0.0);
        assert!((s[0].plastic - 0.04).abs() < 1e-12);
    }

    #[test]
    fn series_weaker_cell_yields() {
        let a = elastic_plastic(1e6, 5e3);
        let b = elastic_plastic(2e6, 8e3);
        let mut s = [CellState::default(); 2];
        let f = series_force(&[&a, &b], &mut s, &[0.0, 0.0], 0.1);
        assert!((f - 5e3).abs() < 1e-6);
        assert!(s[0].plastic > 0.0);
        assert_eq!(s[1].plastic, 0.0);
    }

    #[test]
    fn lockup_stops_plastic_flow() {
        let c = elastic_plastic(1e6, 1e4);
        let mut s = [CellState::default()];
        let f = series_force(&[&c], &mut s, &[0.0], 2.0);
        assert!(s[0].plastic <= c.max_plastic());
        assert!(s[0].plastic < c.densification * c.length);
        assert!(f > 1e4);
    }

    #[test]
    fn static_crush_is_monotone() {
        let c = elastic_plastic(1e6, 1e4);
        let mut prev = 0.0;
        for k in 1..200 {
            let x = c.static_crush(k as f64 * 500.0);
            assert!(x >= prev);
            prev = x;
        }
    }
}
