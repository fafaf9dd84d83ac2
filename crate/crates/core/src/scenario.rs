//! Node geometry, large-scale path loss, small-scale fading draws and the
//! received-signal functionals at Bob and Willie.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::covertness::{kl_divergence, CovertnessBudget};
use crate::error::{Error, Result};
use crate::numerics::cdot_pairs;
use crate::scalar::{Complex, Real};

/// Link-level constants shared by every design algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Alice's power budget (W).
    pub p_max: T,
    /// Channel uses per block.
    pub blocklength: u32,
    /// Noise power at Bob (W).
    pub sigma_b2: T,
    /// Noise power at Willie (W).
    pub sigma_w2: T,
    pub epsilon: T,
    /// Elements per IRS row.
    pub n_x: usize,
    /// IRS rows.
    pub n_z: usize,
    /// Rician factor of the Alice–IRS link (linear).
    pub rician_k: T,
    /// Path gain at the 1 m reference distance (linear).
    pub beta0: T,
}

impl<T: Real> SystemParams<T> {
    pub fn n_elements(&self) -> usize {
        self.n_x * self.n_z
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_max", self.p_max),
            ("sigma_b2", self.sigma_b2),
            ("sigma_w2", self.sigma_w2),
            ("beta0", self.beta0),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite (got {v})")));
            }
        }
        if !(self.rician_k >= T::zero() && self.rician_k.is_finite()) {
            return Err(Error::InvalidParameter(format!("rician_k must be >= 0 (got {})", self.rician_k)));
        }
        if self.n_elements() == 0 {
            return Err(Error::InvalidParameter("IRS must have at least one element".into()));
        }
        self.budget().map(|_| ())
    }

    pub fn budget(&self) -> Result<CovertnessBudget<T>> {
        CovertnessBudget::new(self.epsilon, self.blocklength)
    }
}

/// A point in space, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Position<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Self) -> T {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Node placement and path-loss exponents for the five links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    pub alice: Position<T>,
    pub irs: Position<T>,
    pub bob: Position<T>,
    pub willie: Position<T>,
    pub alpha_ar: T,
    pub alpha_ab: T,
    pub alpha_aw: T,
    pub alpha_rb: T,
    pub alpha_rw: T,
}

/// Large-scale power gains `χ` of the five links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGains<T> {
    pub chi_ar: T,
    pub chi_ab: T,
    pub chi_aw: T,
    pub chi_rb: T,
    pub chi_rw: T,
}

impl<T: Real> Geometry<T> {
    /// Baseline layout: IRS on the `y = 0` wall near Willie, Bob between
    /// Alice and the IRS.
    pub fn reference() -> Self {
        let p = |x: f64, y: f64, z: f64| Position::new(T::lit(x), T::lit(y), T::lit(z));
        Self {
            alice: p(0.0, 5.0, 5.0),
            irs: p(100.0, 0.0, 5.0),
            bob: p(70.0, 10.0, 0.0),
            willie: p(100.0, 10.0, 0.0),
            alpha_ar: T::lit(2.4),
            alpha_ab: T::lit(4.2),
            alpha_aw: T::lit(4.2),
            alpha_rb: T::lit(3.0),
            alpha_rw: T::lit(3.0),
        }
    }

    /// Same layout with the IRS moved along the x axis.
    pub fn with_irs_x(mut self, x: T) -> Self {
        self.irs.x = x;
        self
    }

    pub fn path_gains(&self, beta0: T) -> Result<PathGains<T>> {
        Ok(PathGains {
            chi_ar: path_loss(self.alice.distance(&self.irs), self.alpha_ar, beta0)?,
            chi_ab: path_loss(self.alice.distance(&self.bob), self.alpha_ab, beta0)?,
            chi_aw: path_loss(self.alice.distance(&self.willie), self.alpha_aw, beta0)?,
            chi_rb: path_loss(self.irs.distance(&self.bob), self.alpha_rb, beta0)?,
            chi_rw: path_loss(self.irs.distance(&self.willie), self.alpha_rw, beta0)?,
        })
    }
}

/// `β₀·d^(−α)` with `d` in metres relative to a 1 m reference.
pub fn path_loss<T: Real>(d: T, alpha: T, beta0: T) -> Result<T> {
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::Domain {
            what: "path_loss distance",
            value: d.as_f64(),
            expected: "d > 0",
        });
    }
    Ok(beta0 * d.powf(-alpha))
}

/// One fading realization of every link, large-scale gain included.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    pub h_ar: Vec<Complex<T>>,
    pub h_rb: Vec<Complex<T>>,
    pub h_rw: Vec<Complex<T>>,
    pub h_ab: Complex<T>,
    pub h_aw: Complex<T>,
}

impl<T: Real> ChannelSet<T> {
    pub fn n_elements(&self) -> usize {
        self.h_ar.len()
    }

    /// `‖h_ar‖²`
    pub fn h_ar_energy(&self) -> T {
        self.h_ar.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Generator for the trial with the given seed and stream index.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a channel set from `ChaCha12Rng` seeded with `seed` (stream 0).
pub fn sample_channels<T: Real>(geometry: &Geometry<T>, params: &SystemParams<T>, seed: u64) -> Result<ChannelSet<T>> {
    sample_channels_with(geometry, params, &mut trial_rng(seed, 0))
}

/// Draws a channel set from an arbitrary generator.
///
/// Draw order is `h_ab`, `h_aw`, then per element the Alice–IRS scatter,
/// `h_rb` and `h_rw`. Element `n` therefore sees the same numbers whatever the
/// total element count, so sweeps over `N` use nested realizations.
pub fn sample_channels_with<T: Real, R: Rng + ?Sized>(
    geometry: &Geometry<T>,
    params: &SystemParams<T>,
    rng: &mut R,
) -> Result<ChannelSet<T>> {
    params.validate()?;
    let gains = geometry.path_gains(params.beta0)?;
    let n = params.n_elements();
    let los = ura_steering(geometry, params.n_x, n)?;
    let k = params.rician_k;
    let los_w = (k / (k + T::one())).sqrt();
    let nlos_w = (T::one() + k).recip().sqrt();
    let sqrt_ar = gains.chi_ar.sqrt();

    let h_ab = circular_gaussian(rng, gains.chi_ab);
    let h_aw = circular_gaussian(rng, gains.chi_aw);
    let mut h_ar = Vec::with_capacity(n);
    let mut h_rb = Vec::with_capacity(n);
    let mut h_rw = Vec::with_capacity(n);
    for los_n in los {
        let scatter = circular_gaussian(rng, T::one());
        h_ar.push((los_n * los_w + scatter * nlos_w) * sqrt_ar);
        h_rb.push(circular_gaussian(rng, gains.chi_rb));
        h_rw.push(circular_gaussian(rng, gains.chi_rw));
    }
    Ok(ChannelSet { h_ar, h_rb, h_rw, h_ab, h_aw })
}

/// `CN(0, var)` as two independent normals scaled by `√(var/2)`.
fn circular_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = (var / T::lit(2.0)).sqrt();
    Complex::new(T::lit(re) * s, T::lit(im) * s)
}

/// Half-wavelength URA steering vector toward Alice. The array lies in the
/// x–z plane; element `n = i_z·n_x + i_x`.
fn ura_steering<T: Real>(geometry: &Geometry<T>, n_x: usize, n: usize) -> Result<Vec<Complex<T>>> {
    let d = geometry.irs.distance(&geometry.alice);
    if !(d > T::zero()) {
        return Err(Error::Domain {
            what: "IRS–Alice distance",
            value: d.as_f64(),
            expected: "> 0",
        });
    }
    let ux = (geometry.alice.x - geometry.irs.x) / d;
    let uz = (geometry.alice.z - geometry.irs.z) / d;
    Ok((0..n)
        .map(|idx| {
            let (ix, iz) = (T::lit((idx % n_x) as f64), T::lit((idx / n_x) as f64));
            Complex::from_polar(T::one(), T::PI() * (ix * ux + iz * uz))
        })
        .collect())
}

/// Cascade vectors `a_n = conj(h_rw,n)·h_ar,n` and `b_n = conj(h_rb,n)·h_ar,n`.
pub fn cascade_vectors<T: Real>(ch: &ChannelSet<T>) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let a = ch.h_rw.iter().zip(&ch.h_ar).map(|(w, r)| w.conj() * r).collect();
    let b = ch.h_rb.iter().zip(&ch.h_ar).map(|(w, r)| w.conj() * r).collect();
    (a, b)
}

/// `vᴴx + h = Σ conj(v_n)·x_n + h`, summed in compensated arithmetic so
/// that near-cancellation at Willie is resolved.
///
/// # Panics
/// If `v` and `x` differ in length.
pub fn effective_channel<T: Real>(v: &[Complex<T>], x: &[Complex<T>], h: Complex<T>) -> Complex<T> {
    assert_eq!(v.len(), x.len(), "reflect vector and cascade vector lengths differ");
    let one = Complex::new(T::one(), T::zero());
    cdot_pairs(v.iter().copied().zip(x.iter().copied()).chain(std::iter::once((one, h))))
}

/// Received SNR at Bob, `(p_a/σ_b²)·|vᴴb + h_ab|²`.
pub fn bob_snr<T: Real>(p_a: T, v: &[Complex<T>], b: &[Complex<T>], h_ab: Complex<T>, sigma_b2: T) -> T {
    p_a / sigma_b2 * effective_channel(v, b, h_ab).norm_sqr()
}

/// Willie's composite power gain `|vᴴa + h_aw|²`.
pub fn willie_gain<T: Real>(v: &[Complex<T>], a: &[Complex<T>], h_aw: Complex<T>) -> T {
    effective_channel(v, a, h_aw).norm_sqr()
}

/// Rounding level of `|vᴴa + h_aw|²`. A gain at or below it cannot be told
/// apart from exact cancellation at Willie.
pub fn cancellation_floor<T: Real>(v: &[Complex<T>], a: &[Complex<T>], h_aw: Complex<T>) -> T {
    let a_norm2 = h_aw.norm_sqr() + a.iter().map(|z| z.norm_sqr()).sum::<T>();
    let u_norm2 = T::one() + v.iter().map(|z| z.norm_sqr()).sum::<T>();
    (T::lit(32.0) * T::epsilon()).powi(2) * a_norm2 * u_norm2
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_phase<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let w = theta % two_pi;
    let w = if w < T::zero() { w + two_pi } else { w };
    if w >= two_pi {
        T::zero()
    } else {
        w
    }
}

/// Outcome of a design algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectDesign<T> {
    /// Transmit power (W).
    pub p_a: T,
    /// Reflection amplitudes in `[0, 1]`.
    pub rho: Vec<T>,
    /// Phase shifts in `[0, 2π)`.
    pub theta: Vec<T>,
    /// Linear SNR at Bob.
    pub bob_snr: T,
    /// Linear power gain of Willie's composite channel. No-CSI designs report
    /// its mean instead.
    pub willie_gain: T,
    /// KL divergence (nats) of the design; expected value for no-CSI designs.
    pub kl_value: T,
}

impl<T: Real> ReflectDesign<T> {
    /// Reflect vector `v_n = ρ_n·e^(−jθ_n)`.
    pub fn reflect_vector(&self) -> Vec<Complex<T>> {
        self.rho
            .iter()
            .zip(&self.theta)
            .map(|(&r, &t)| Complex::from_polar(r, -t))
            .collect()
    }

    /// Evaluates a reflect vector and power against a realization with full CSI.
    pub fn from_vector(
        p_a: T,
        v: &[Complex<T>],
        a: &[Complex<T>],
        b: &[Complex<T>],
        h_ab: Complex<T>,
        h_aw: Complex<T>,
        params: &SystemParams<T>,
    ) -> Result<Self> {
        let (rho, theta) = polar_parts(v);
        let gain = willie_gain(v, a, h_aw);
        Ok(Self {
            p_a,
            rho,
            theta,
            bob_snr: bob_snr(p_a, v, b, h_ab, params.sigma_b2),
            willie_gain: gain,
            kl_value: kl_divergence(p_a, detectable_gain(gain, v, a, h_aw), params.sigma_w2, params.blocklength)?,
        })
    }
}

/// `gain`, or zero when it is below the cancellation floor.
pub(crate) fn detectable_gain<T: Real>(gain: T, v: &[Complex<T>], a: &[Complex<T>], h_aw: Complex<T>) -> T {
    if gain > cancellation_floor(v, a, h_aw) {
        gain
    } else {
        T::zero()
    }
}

/// Splits `v_n = ρ_n·e^(−jθ_n)` into `(ρ, θ)` with `θ ∈ [0, 2π)`.
pub fn polar_parts<T: Real>(v: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    v.iter().map(|z| (z.norm(), wrap_phase(-z.arg()))).unzip()
}
