//! Short-time propagation by Chebyshev expansion of `exp(-iĤΔt)`.
//!
//! The Hamiltonian is frozen at the step midpoint and rescaled onto
//! `[-1, 1]` with the system's spectral bounds; the expansion coefficients
//! are `(2 - δ_{k0}) J_k(ΔE Δt)`. The recursion keeps three state-sized
//! buffers and never stores the full polynomial sequence.

mod absorber;
pub mod bessel;

pub use absorber::{absorb_and_accumulate, AbsorberSpec, FragmentAccumulator, GROUND_ABSORPTION_LIMIT};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::system::{Affine, HamiltonianWorkspace, MolecularSystem, SpectralBounds};
use crate::wavefunction::Wavefunction;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ChebyshevPlan {
    dt: f64,
    bounds: SpectralBounds,
    coefficients: Vec<f64>,
}

impl ChebyshevPlan {
    /// Builds the expansion for time step `dt` (atomic units) and the
    /// given spectral bounds, truncating where the coefficients fall below
    /// `tolerance` past the Bessel turnover.
    pub fn new(bounds: SpectralBounds, dt: f64, tolerance: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::Config(format!(
                "Chebyshev tolerance must lie in (0, 1), got {tolerance}"
            )));
        }
        if !(bounds.e_max >= bounds.e_min) {
            return Err(Error::Config("spectral bounds are inverted".into()));
        }
        let x = bounds.half_width() * dt;
        let mut k_max = (1.5 * x) as usize + 40;
        loop {
            let j = bessel::bessel_j_sequence(x, k_max);
            let cut = j
                .iter()
                .enumerate()
                .position(|(k, v)| k as f64 > x && 2.0 * v.abs() < tolerance);
            if let Some(order) = cut {
                let coefficients = j[..=order]
                    .iter()
                    .enumerate()
                    .map(|(k, v)| if k == 0 { *v } else { 2.0 * v })
                    .collect();
                return Ok(ChebyshevPlan {
                    dt,
                    bounds,
                    coefficients,
                });
            }
            k_max *= 2;
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn bounds(&self) -> SpectralBounds {
        self.bounds
    }

    /// Expansion order `M`; terms `0..=M` are used and `|a_M|` is below
    /// the tolerance.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `a_k = (2 - δ_{k0}) J_k(ΔE Δt)`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

pub fn build_plan(sys: &MolecularSystem, dt: f64, tolerance: f64) -> Result<ChebyshevPlan> {
    ChebyshevPlan::new(sys.spectral_bounds(), dt, tolerance)
}

/// Three recursion buffers plus the Hamiltonian scratch, owned by one task.
#[derive(Debug, Clone)]
pub struct StepWorkspace {
    prev: Vec<Complex64>,
    current: Vec<Complex64>,
    result: Vec<Complex64>,
    ham: HamiltonianWorkspace,
}

impl StepWorkspace {
    pub fn new(sys: &MolecularSystem) -> Self {
        let len = sys.channels().len() * sys.grid().len();
        StepWorkspace {
            prev: vec![Complex64::default(); len],
            current: vec![Complex64::default(); len],
            result: vec![Complex64::default(); len],
            ham: HamiltonianWorkspace::new(sys.grid()),
        }
    }
}

/// Advances `psi` from `t` to `t + Δt` with `Ĥ` frozen at `t + Δt/2`.
pub fn step(
    psi: &mut Wavefunction,
    t: f64,
    plan: &ChebyshevPlan,
    sys: &MolecularSystem,
    ws: &mut StepWorkspace,
) -> Result<()> {
    sys.check_shape(psi)?;
    let active = sys.active_channels(psi);
    let field = sys.field_at(t + 0.5 * plan.dt);
    chebyshev(psi, field, plan, sys, ws, &active, -1.0)
}

/// Exact inverse of [`step`] at the same `t`: applies `exp(+iĤ(t+Δt/2)Δt)`.
pub fn step_back(
    psi: &mut Wavefunction,
    t: f64,
    plan: &ChebyshevPlan,
    sys: &MolecularSystem,
    ws: &mut StepWorkspace,
) -> Result<()> {
    sys.check_shape(psi)?;
    let active = sys.active_channels(psi);
    let field = sys.field_at(t + 0.5 * plan.dt);
    chebyshev(psi, field, plan, sys, ws, &active, 1.0)
}

/// `psi ← exp(sign · iĤΔt) psi` over the active channels.
pub(crate) fn chebyshev(
    psi: &mut Wavefunction,
    field: f64,
    plan: &ChebyshevPlan,
    sys: &MolecularSystem,
    ws: &mut StepWorkspace,
    active: &[usize],
    sign: f64,
) -> Result<()> {
    let n = sys.grid().len();
    let center = plan.bounds.center();
    let half = plan.bounds.half_width();
    let a = plan.coefficients();
    let norm_in = psi.norm_sqr(sys.grid().dr());

    if half == 0.0 {
        // degenerate spectrum: pure phase
        psi.scale(Complex64::from_polar(1.0, sign * center * plan.dt));
        return Ok(());
    }

    let StepWorkspace {
        prev,
        current,
        result,
        ham,
    } = ws;
    let psi_data = psi.as_mut_slice();
    for &c in active {
        let r = c * n..(c + 1) * n;
        prev[r.clone()].copy_from_slice(&psi_data[r.clone()]);
        for (o, z) in result[r.clone()].iter_mut().zip(&psi_data[r]) {
            *o = a[0] * z;
        }
    }
    // φ₁ = Ĥ_s φ₀
    sys.apply_affine(
        prev,
        field,
        current,
        Affine {
            alpha: 1.0 / half,
            beta: -center / half,
            gamma: 0.0,
        },
        active,
        ham,
    );
    // (sign · i)^k
    let unit = Complex64::new(0.0, sign);
    let mut phase = unit;
    accumulate(result, current, a[1] * phase, active, n);
    for &ak in &a[2..] {
        // prev ← 2Ĥ_s current − prev
        sys.apply_affine(
            current,
            field,
            prev,
            Affine {
                alpha: 2.0 / half,
                beta: -2.0 * center / half,
                gamma: -1.0,
            },
            active,
            ham,
        );
        std::mem::swap(prev, current);
        phase *= unit;
        accumulate(result, current, ak * phase, active, n);
    }
    let global = Complex64::from_polar(1.0, sign * center * plan.dt);
    for &c in active {
        let r = c * n..(c + 1) * n;
        for (z, w) in psi_data[r.clone()].iter_mut().zip(&result[r]) {
            *z = global * w;
        }
    }

    let norm_out = psi.norm_sqr(sys.grid().dr());
    if !norm_out.is_finite() || norm_out > norm_in * (1.0 + 1e-6) {
        return Err(Error::Instability {
            reason: format!("Chebyshev recursion diverged (norm {norm_in:.6e} -> {norm_out:.6e})"),
            max_rayleigh: max_rayleigh_quotient(prev, field, sys, active),
            e_min: plan.bounds.e_min,
            e_max: plan.bounds.e_max,
        });
    }
    Ok(())
}

fn accumulate(result: &mut [Complex64], term: &[Complex64], coef: Complex64, active: &[usize], n: usize) {
    for &c in active {
        let r = c * n..(c + 1) * n;
        for (o, z) in result[r.clone()].iter_mut().zip(&term[r]) {
            *o += coef * z;
        }
    }
}

/// Largest per-channel Rayleigh quotient of `Ĥ` for the given vector.
fn max_rayleigh_quotient(v: &[Complex64], field: f64, sys: &MolecularSystem, active: &[usize]) -> f64 {
    let n = sys.grid().len();
    let mut hv = vec![Complex64::default(); v.len()];
    let mut ws = HamiltonianWorkspace::new(sys.grid());
    sys.apply_affine(v, field, &mut hv, Affine::PLAIN, active, &mut ws);
    let mut best = f64::MIN;
    for &c in active {
        let r = c * n..(c + 1) * n;
        let num: Complex64 = v[r.clone()].iter().zip(&hv[r.clone()]).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = v[r].iter().map(|z| z.norm_sqr()).sum();
        if den > 0.0 && den.is_finite() {
            best = best.max(num.re / den);
        }
    }
    best
}

/// Everything needed to carry an initial state to the final time.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub plan: ChebyshevPlan,
    pub absorber: AbsorberSpec,
    pub n_steps: usize,
}

impl Propagation {
    pub fn run(&self, sys: &MolecularSystem, psi0: Wavefunction) -> Result<Evolution> {
        evolve(sys, &self.plan, &self.absorber, psi0, self.n_steps)
    }

    pub fn t_final(&self) -> f64 {
        self.n_steps as f64 * self.plan.dt()
    }
}

/// Final state of one propagation.
#[derive(Debug, Clone)]
pub struct Evolution {
    /// Amplitude remaining on the grid.
    pub psi: Wavefunction,
    pub fragments: FragmentAccumulator,
    pub t_final: f64,
}

/// Propagates `psi0` through `n_steps` steps starting at `t = 0`, masking
/// after each step when the absorber is enabled.
pub fn evolve(
    sys: &MolecularSystem,
    plan: &ChebyshevPlan,
    absorber: &AbsorberSpec,
    psi0: Wavefunction,
    n_steps: usize,
) -> Result<Evolution> {
    sys.check_shape(&psi0)?;
    let mut psi = psi0;
    let mut ws = StepWorkspace::new(sys);
    let mut fragments = FragmentAccumulator::new(sys.channels(), sys.grid());
    let active = sys.active_channels(&psi);
    let dt = plan.dt();
    for k in 0..n_steps {
        let t = k as f64 * dt;
        let field = sys.field_at(t + 0.5 * dt);
        chebyshev(&mut psi, field, plan, sys, &mut ws, &active, -1.0)?;
        absorb_and_accumulate(&mut psi, &mut fragments, absorber, t + dt, sys, &active)?;
    }
    Ok(Evolution {
        psi,
        fragments,
        t_final: n_steps as f64 * dt,
    })
}
