"""Fiber-tip cavity design: finesse and loss budget, cavity QED rates,
coupler optimization, geometry, length sweeps and feasibility checks.

Conventions
-----------
* ``gamma`` is the angular half-linewidth of the atomic transition (the
  spontaneous emission rate is 2 gamma); input files carry it as
  ``gamma_over_2pi_MHz`` to keep factors of 2 pi explicit.
* Losses and transmissions are dimensionless fractions internally; I/O uses
  ppm.
* ``r_t`` is the fraction of the total round-trip loss exiting through the
  intended output coupler, T_f / (T_f + T_e + L_f + L_e).
* The cavity waist sits on the flat mirror; the curved mirror has radius of
  curvature ``roc`` and the stability relation is z_R^2 = (roc - l) l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .beams import FiberMode, GaussianBeam
from .constants import C_LIGHT, TWO_PI
from .fields import gaussian_overlap_analytic


@dataclass(frozen=True)
class MirrorSpec:
    """Coating transmission and passive loss of one cavity mirror (fractions,
    not ppm); ``roc`` is None for a flat mirror."""

    transmission: float
    passive_loss: float
    roc: float | None = None

    def __post_init__(self):
        if self.transmission < 0 or self.passive_loss < 0:
            raise ValueError("transmission and passive loss must be non-negative")
        if self.transmission + self.passive_loss >= 1.0:
            raise ValueError("transmission + loss must stay below 1")
        if self.roc is not None and self.roc <= 0:
            raise ValueError("radius of curvature must be positive")


@dataclass(frozen=True)
class AtomSpec:
    """Atomic transition: wavelength, angular half-linewidth gamma (rad/s,
    spontaneous rate = 2 gamma) and branching ratio into the collected line."""

    wavelength: float
    gamma: float
    branching_ratio: float = 1.0

    def __post_init__(self):
        if self.wavelength <= 0 or self.gamma <= 0:
            raise ValueError("wavelength and gamma must be positive")
        if not 0.0 < self.branching_ratio <= 1.0:
            raise ValueError("branching ratio must lie in (0, 1]")

    @classmethod
    def from_linewidth_mhz(
        cls, wavelength: float, gamma_over_2pi_mhz: float, branching_ratio: float = 1.0
    ) -> "AtomSpec":
        return cls(wavelength, TWO_PI * gamma_over_2pi_mhz * 1e6, branching_ratio)


#: Yb+ 2S1/2 <-> 2P1/2 at 369.5 nm with gamma/2pi = 10 MHz, Br = 1.
YB_ATOM = AtomSpec.from_linewidth_mhz(369.5e-9, 10.0)


@dataclass(frozen=True)
class CavityDesign:
    """Plano-concave cavity with the ion trapped at height ``ion_height``
    above the flat (fiber-tip) mirror where the waist sits."""

    length: float
    flat_mirror: MirrorSpec
    curved_mirror: MirrorSpec
    ion_height: float
    atom: AtomSpec
    fiber: FiberMode

    def __post_init__(self):
        roc = self.curved_mirror.roc
        if roc is None:
            raise ValueError("curved mirror needs a radius of curvature")
        if not 0.0 < self.length <= roc:
            raise ValueError("stability requires 0 < length <= curved RoC")
        if not 0.0 <= self.ion_height < self.length:
            raise ValueError("ion must sit inside the cavity volume")

    @property
    def total_loss(self) -> float:
        return (
            self.flat_mirror.transmission
            + self.flat_mirror.passive_loss
            + self.curved_mirror.transmission
            + self.curved_mirror.passive_loss
        )

    @property
    def passive_loss(self) -> float:
        """Everything except the intended output coupling T_f."""
        return self.total_loss - self.flat_mirror.transmission

    def with_length(self, length: float) -> "CavityDesign":
        return replace(self, length=length)


@dataclass(frozen=True)
class CavityDerived:
    """All derived quantities of a cavity design."""

    finesse: float
    fsr: float                 # Hz
    kappa: float               # rad/s
    g: float                   # rad/s
    cooperativity: float
    characteristic_length: float
    characteristic_radius: float
    waist_radius: float
    ion_mode_radius: float
    p_cavity: float
    mode_matching: float
    r_t: float
    p_fiber: float


def finesse_from_loss(total_loss: float) -> float:
    """F = 2 pi sqrt(1 - L) / L for round-trip loss L."""
    if not 0.0 < total_loss < 1.0:
        raise ValueError(f"total loss must lie in (0, 1), got {total_loss}")
    return TWO_PI * math.sqrt(1.0 - total_loss) / total_loss


def scattering_loss(rms_roughness: float, wavelength: float) -> float:
    """Surface-scattering loss 1 - exp[-(4 pi sigma / lambda)^2]."""
    if rms_roughness < 0:
        raise ValueError("roughness must be non-negative")
    return 1.0 - math.exp(-((4.0 * math.pi * rms_roughness / wavelength) ** 2))


def characteristic_lengths(finesse: float, atom: AtomSpec) -> tuple[float, float]:
    """Characteristic cavity length l_c = pi c / (2 gamma F) and beam radius
    r_c = sqrt(6 lambda^2 F Br / pi^3)."""
    if finesse <= 0:
        raise ValueError("finesse must be positive")
    l_c = math.pi * C_LIGHT / (2.0 * atom.gamma * finesse)
    r_c = math.sqrt(6.0 * atom.wavelength**2 * finesse * atom.branching_ratio / math.pi**3)
    return l_c, r_c


def cooperativity(finesse: float, atom: AtomSpec, ion_mode_radius: float) -> float:
    """C = 3 F Br lambda^2 / (pi^3 r_ion^2), equal to (r_c / r_ion)^2 / 2."""
    if ion_mode_radius <= 0:
        raise ValueError("mode radius at the ion must be positive")
    return 3.0 * finesse * atom.branching_ratio * atom.wavelength**2 / (math.pi**3 * ion_mode_radius**2)


def p_cavity(length: float, ion_mode_radius: float, finesse: float, atom: AtomSpec) -> float:
    """Photon extraction probability into the cavity decay channel,

        P = 1/(1 + l/l_c) * 1/(1 + r_ion^2/r_c^2)
          = (kappa/(kappa+gamma)) * (2C/(2C+1)).
    """
    if min(length, ion_mode_radius, finesse) <= 0:
        raise ValueError("length, mode radius and finesse must be positive")
    l_c, r_c = characteristic_lengths(finesse, atom)
    return 1.0 / (1.0 + length / l_c) / (1.0 + (ion_mode_radius / r_c) ** 2)


def optimal_coupler(
    c0: float, length: float, l_c0: float, passive_loss: float | None = None
) -> tuple[float, float, float]:
    """Output-coupler working point maximizing the unit-overlap fiber
    probability, using the F ~ F0 (1 - r_t) loss model.

    Returns (r_t0, T_f, P_max) where

        r_t0  = 1 / (1 + 1/sqrt((1 + 2 C0)(1 + l/l_c0)))
        P_max = C0 / (1 + C0 + l/(2 l_c0) + sqrt((1 + 2 C0)(1 + l/l_c0)))

    and T_f = r_t0 L_passive / (1 - r_t0) converts the loss fraction into a
    coupler transmission (NaN when no passive loss is supplied).
    """
    if c0 <= 0 or length <= 0 or l_c0 <= 0:
        raise ValueError("c0, length and l_c0 must be positive")
    root = math.sqrt((1.0 + 2.0 * c0) * (1.0 + length / l_c0))
    r_t0 = 1.0 / (1.0 + 1.0 / root)
    p_max = c0 / (1.0 + c0 + length / (2.0 * l_c0) + root)
    t_f = math.nan if passive_loss is None else r_t0 * passive_loss / (1.0 - r_t0)
    return r_t0, t_f, p_max


def p_fiber_of_coupling_fraction(r_t: float, c0: float, length: float, l_c0: float) -> float:
    """Unit-overlap fiber probability r_t * P_cavity at output fraction r_t,
    under the same F = F0 (1 - r_t) model used by ``optimal_coupler``.

    With finesse scaled by (1 - r_t): l_c = l_c0/(1-r_t), C = C0 (1-r_t).
    """
    if not 0.0 < r_t < 1.0:
        raise ValueError("r_t must lie in (0, 1)")
    shrink = 1.0 - r_t
    length_factor = 1.0 / (1.0 + (length / l_c0) * shrink)
    radius_factor = 2.0 * c0 * shrink / (2.0 * c0 * shrink + 1.0)
    return r_t * length_factor * radius_factor


def geometry_from_length(
    length: float, roc: float, ion_height: float, wavelength: float
) -> tuple[float, float]:
    """Waist radius on the flat mirror and mode radius at the ion for a
    plano-concave cavity: z_R = sqrt((roc - l) l), w0 = sqrt(z_R lambda/pi),
    r_ion = w0 sqrt(1 + (h_ion/z_R)^2)."""
    if not 0.0 < length < roc:
        raise ValueError("geometry requires 0 < length < roc")
    return geometry_from_gap(roc - length, roc, ion_height, wavelength)


def geometry_from_gap(
    gap: float, roc: float, ion_height: float, wavelength: float
) -> tuple[float, float]:
    """Same as ``geometry_from_length`` but parametrized by gap = roc - l.

    Near-concentric designs sit within nanometers of the RoC; passing the gap
    directly avoids the catastrophic cancellation of forming roc - l.
    """
    if not 0.0 < gap < roc:
        raise ValueError("gap must lie in (0, roc)")
    z_r = math.sqrt(gap * (roc - gap))
    w0 = math.sqrt(z_r * wavelength / math.pi)
    r_ion = w0 * math.sqrt(1.0 + (ion_height / z_r) ** 2)
    return w0, r_ion


def optimal_waist(ion_height: float, wavelength: float) -> float:
    """Waist minimizing the mode radius at height h: w0 = sqrt(h lambda/pi)."""
    if ion_height <= 0:
        raise ValueError("ion height must be positive")
    return math.sqrt(ion_height * wavelength / math.pi)


def qed_rates(design: CavityDesign) -> tuple[float, float]:
    """Coherent coupling g and field decay rate kappa (both rad/s):
    kappa = pi FSR / F, g = sqrt(2 C kappa gamma)."""
    derived = evaluate_design(design)
    return derived.g, derived.kappa


def evaluate_design(design: CavityDesign) -> CavityDerived:
    """Full derived record for a design, including the fiber probability
    P_fiber = eps * r_t * P_cavity."""
    atom = design.atom
    finesse = finesse_from_loss(design.total_loss)
    roc = design.curved_mirror.roc
    w0, r_ion = geometry_from_length(design.length, roc, design.ion_height, atom.wavelength)
    l_c, r_c = characteristic_lengths(finesse, atom)
    coop = cooperativity(finesse, atom, r_ion)
    fsr = C_LIGHT / (2.0 * design.length)
    kappa = math.pi * fsr / finesse
    g = math.sqrt(2.0 * coop * kappa * atom.gamma)
    extraction = p_cavity(design.length, r_ion, finesse, atom)
    r_t = design.flat_mirror.transmission / design.total_loss
    # Cavity waist and fiber mode are both flat at the fiber-tip plane, so the
    # overlap is the waist-to-waist special case.
    cavity_mode = GaussianBeam(atom.wavelength, w0)
    fiber_mode = GaussianBeam(atom.wavelength, design.fiber.waist_radius)
    eps = gaussian_overlap_analytic(cavity_mode, fiber_mode)
    return CavityDerived(
        finesse=finesse,
        fsr=fsr,
        kappa=kappa,
        g=g,
        cooperativity=coop,
        characteristic_length=l_c,
        characteristic_radius=r_c,
        waist_radius=w0,
        ion_mode_radius=r_ion,
        p_cavity=extraction,
        mode_matching=eps,
        r_t=r_t,
        p_fiber=eps * r_t * extraction,
    )


@dataclass(frozen=True)
class SweepPoint:
    length: float
    waist_radius: float
    ion_mode_radius: float
    mode_matching: float
    p_cavity: float
    p_fiber: float


def length_sweep(design: CavityDesign, lengths) -> list[SweepPoint]:
    """Evaluate the design at each cavity length (mirrors held fixed)."""
    points = []
    for length in np.asarray(lengths, dtype=float):
        derived = evaluate_design(design.with_length(float(length)))
        points.append(
            SweepPoint(
                length=float(length),
                waist_radius=derived.waist_radius,
                ion_mode_radius=derived.ion_mode_radius,
                mode_matching=derived.mode_matching,
                p_cavity=derived.p_cavity,
                p_fiber=derived.p_fiber,
            )
        )
    return points


def default_sweep_lengths(design: CavityDesign, samples: int = 512) -> np.ndarray:
    """Log-spaced grid in the gap variable (roc - l), covering waists from
    deep sub-micron up to gaps past the ion height; dense near concentricity
    where everything interesting happens."""
    roc = design.curved_mirror.roc
    gaps = np.geomspace(1e-9, min(0.2 * roc, 100.0 * design.ion_height), samples)
    return roc - gaps[::-1]


@dataclass(frozen=True)
class SweepExtrema:
    length_min_r_ion: float
    length_max_overlap: float
    max_p_fiber: float
    length_max_p_fiber: float


def _refine(objective, lengths, values, minimize: bool = True) -> float:
    """Golden-section refinement around the best point of a dense grid.
    Ties break toward the smaller length."""
    idx = int(np.argmin(values) if minimize else np.argmax(values))
    lo = lengths[max(idx - 1, 0)]
    hi = lengths[min(idx + 1, len(lengths) - 1)]
    if lo == hi:
        return float(lengths[idx])
    sign = 1.0 if minimize else -1.0
    result = minimize_scalar(
        lambda l: sign * objective(l), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.x)


def sweep_extrema(design: CavityDesign, samples: int = 512) -> SweepExtrema:
    """Locations of minimum r_ion, maximum fiber-mode matching and maximum
    P_fiber over the cavity length, refined beyond the grid spacing."""
    lengths = default_sweep_lengths(design, samples)
    points = length_sweep(design, lengths)
    r_ion = np.array([p.ion_mode_radius for p in points])
    eps = np.array([p.mode_matching for p in points])
    p_fib = np.array([p.p_fiber for p in points])

    def eval_at(attr):
        def inner(length):
            return getattr(evaluate_design(design.with_length(length)), attr)
        return inner

    l_rion = _refine(eval_at("ion_mode_radius"), lengths, r_ion, minimize=True)
    l_eps = _refine(eval_at("mode_matching"), lengths, eps, minimize=False)
    l_pf = _refine(eval_at("p_fiber"), lengths, p_fib, minimize=False)
    best_pf = evaluate_design(design.with_length(l_pf)).p_fiber
    return SweepExtrema(
        length_min_r_ion=l_rion,
        length_max_overlap=l_eps,
        max_p_fiber=best_pf,
        length_max_p_fiber=l_pf,
    )


def stirap_extraction(coop: float) -> float:
    """Steady-state photon extraction probability 2C/(2C+1) of the adiabatic
    dark-state (STIRAP) scheme."""
    if coop < 0:
        raise ValueError("cooperativity must be non-negative")
    return 2.0 * coop / (2.0 * coop + 1.0)


def photon_timescales(g: float, kappa: float) -> dict[str, float]:
    """Characteristic single-photon generation times (seconds).

    Pulsed excitation emits on the order of max(1/g, 1/kappa); the adiabatic
    scheme needs ramping slow against 1/g (much longer in the weak-coupling
    regime), so only order-of-magnitude constants are reported.
    """
    return {
        "pulsed": max(1.0 / g, 1.0 / kappa),
        "adiabatic_floor": 1.0 / g,
    }


def concentric_waist_limit(roc: float, wavelength: float) -> float:
    """Upper end of the usable waist window of a symmetric two-concave-mirror
    cavity tuned to its last stable resonance before the concentric point:
    w0 < sqrt(lambda/pi) * (roc lambda / 2)^(1/4)."""
    return math.sqrt(wavelength / math.pi) * (roc * wavelength / 2.0) ** 0.25


def concentric_bounds(roc: float, atom: AtomSpec, finesse: float) -> tuple[float, float]:
    """Bounds on P_cavity for a symmetric concave-concave cavity (length
    2 RoC, ion at the central waist).

    The length factor is 1/(1 + 2 RoC / l_c).  The radius factor
    1/(1 + (w0/r_c)^2) spans (f_min, 1] as the waist runs over the
    near-concentric window (0, w0_max); both endpoints are evaluated, not
    hard-coded.
    """
    if roc <= 0:
        raise ValueError("roc must be positive")
    l_c, r_c = characteristic_lengths(finesse, atom)
    length_factor = 1.0 / (1.0 + 2.0 * roc / l_c)
    w0_max = concentric_waist_limit(roc, atom.wavelength)
    radius_low = 1.0 / (1.0 + (w0_max / r_c) ** 2)
    return length_factor * radius_low, length_factor


@dataclass(frozen=True)
class FeasibilityReport:
    required_length: float
    design_length: float
    length_matches: bool
    cavity_fwhm_hz: float
    covers_linewidth: bool
    max_finesse: float

    @property
    def feasible(self) -> bool:
        return self.length_matches and self.covers_linewidth


def frequency_qubit_feasibility(
    design: CavityDesign,
    hyperfine_splitting: float,
    linewidth: float,
    length_tolerance: float = 1e-4,
) -> FeasibilityReport:
    """Check whether a cavity can host a frequency qubit whose two photon
    components are split by ``hyperfine_splitting`` (Hz).

    The FSR must match the splitting, fixing the length to c/(2 splitting);
    and the cavity line (FWHM = kappa/pi in Hz) must cover the atomic
    ``linewidth`` (Hz), which caps the usable finesse at FSR/linewidth.
    """
    if hyperfine_splitting <= 0 or linewidth <= 0:
        raise ValueError("splitting and linewidth must be positive")
    required = C_LIGHT / (2.0 * hyperfine_splitting)
    derived = evaluate_design(design)
    fwhm = derived.kappa / math.pi
    return FeasibilityReport(
        required_length=required,
        design_length=design.length,
        length_matches=abs(design.length - required) <= length_tolerance * required,
        cavity_fwhm_hz=fwhm,
        covers_linewidth=fwhm >= linewidth,
        max_finesse=hyperfine_splitting / linewidth,
    )
