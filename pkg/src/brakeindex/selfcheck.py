"""Built-in verification battery.

Ten end-to-end checks pin the numerics to closed forms and to
independent oracles at desk scale: rotation index tables, cap mode
counts, gluing ledgers, spectral flow laws, kernel/nullity matching,
loop shifts, nullity additivity, dimension assembly, the brake orbit
pipeline, and good/bad iterate classification.  The same battery backs
the command line selfcheck and the acceptance tests.
"""

from __future__ import annotations

import dataclasses
import math
import time

import numpy as np

from .asymptotic import (
    BRAKE as BRAKE_DOMAIN,
    FULL,
    AsymptoticOperator,
    SymmetricLoop,
    blend_family,
    cylinder_index,
    kernel_dimension,
    spectral_flow,
)
from .capmodel import (
    NEGATIVE,
    POSITIVE,
    Boundary,
    CapSpec,
    GluePiece,
    cap_index,
    cap_kernel_cokernel,
    glue,
    riemann_roch_brake,
)
from .core import (
    HalfInt,
    brake_involution,
    check_brake_symmetry,
    diagonal_unitary_loop,
    fundamental_solution,
    hyperbolic_path,
    loop_degree,
    rotation_path,
)
from .errors import BrakeIndexError
from .hamiltonian import find_brake_orbit, harmonic_system, linearized_path
from .indices import brake_maslov, conley_zehnder, cz_of_product, mu1_of_product, nullities
from .moduli import (
    BRAKE,
    PAIR,
    ModuliSpec,
    OrbitRecord,
    aut_dim,
    classify_good_bad,
    fredholm_index,
    orbit_degree,
    teichmuller_dim,
    virtual_dimension,
)

TWO_PI = 2.0 * math.pi


def _sym(rng, n, scale):
    m = rng.uniform(-scale, scale, (n, n))
    return 0.5 * (m + m.T)


def _even_sym(rng, n, scale):
    """Random symmetric matrix commuting with the brake involution."""
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = _sym(rng, n, scale)
    out[n:, n:] = _sym(rng, n, scale)
    return out


def _odd_sym(rng, n, scale):
    """Random symmetric matrix anticommuting with the brake involution."""
    c = rng.uniform(-scale, scale, (n, n))
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = c
    out[n:, :n] = c.T
    return out


def _random_brake_loop(rng, n, const_scale=3.0, var_scale=0.8):
    return SymmetricLoop.fourier(
        _even_sym(rng, n, const_scale),
        cos={1: _even_sym(rng, n, var_scale), 2: _even_sym(rng, n, 0.5 * var_scale)},
        sin={1: _odd_sym(rng, n, var_scale), 2: _odd_sym(rng, n, 0.5 * var_scale)},
    )


def _exp_path(s_matrix, steps=2048):
    s_matrix = np.asarray(s_matrix, dtype=float)
    return fundamental_solution(lambda t: s_matrix, (0.0, 1.0), steps=steps)


def _nonresonant(rng, lo=-4.0 * math.pi, hi=4.0 * math.pi, margin=0.05):
    while True:
        omega = float(rng.uniform(lo, hi))
        frac = omega / TWO_PI
        if abs(frac - round(frac)) > margin:
            return omega


def _c1_rotation_table():
    fails = []
    slowest = 0.0
    for k, omega in enumerate((math.pi, 3 * math.pi, 5 * math.pi, 7 * math.pi)):
        t0 = time.perf_counter()
        value = brake_maslov(rotation_path(omega, samples=2048))
        dt = time.perf_counter() - t0
        slowest = max(slowest, dt)
        want = HalfInt(1 + 2 * k)
        if value != want:
            fails.append(f"omega={2 * k + 1}pi gave {value}, want {want}")
        if dt > 1.0:
            fails.append(f"omega={2 * k + 1}pi took {dt:.2f}s (budget 1s)")
    if fails:
        return False, "; ".join(fails)
    return True, f"mu1 = 1/2..7/2 exact for omega in pi..7pi, slowest {slowest:.2f}s"


def _c2_cap_vs_crossing():
    rng = np.random.default_rng(2218)
    fails = []
    for _ in range(20):
        omega = _nonresonant(rng)
        ker, coker = cap_kernel_cokernel(CapSpec(omega))
        mu1 = brake_maslov(rotation_path(omega, samples=1024))
        want = HalfInt(1) + mu1
        if HalfInt.from_int(ker - coker) != want:
            fails.append(
                f"omega={omega:.4f}: ker-coker={ker - coker} vs 1/2+mu1={want}"
            )
    if fails:
        return False, "; ".join(fails[:3])
    return True, "ker - coker = 1/2 + mu1 for 20 random nonresonant omegas"


def _c3_glued_sphere():
    rng = np.random.default_rng(3317)
    one = riemann_roch_brake(0)
    if one != HalfInt.from_int(1):
        return False, f"riemann_roch_brake(0) = {one}, want 1"
    fails = []
    for _ in range(10):
        om_a = _nonresonant(rng)
        om_b = _nonresonant(rng)
        mu_a = brake_maslov(rotation_path(om_a, samples=1024))
        mu_b = brake_maslov(rotation_path(om_b, samples=1024))
        eye = np.eye(2)
        fam = blend_family(SymmetricLoop.constant(om_a * eye),
                           SymmetricLoop.constant(om_b * eye),
                           domain=BRAKE_DOMAIN)
        cyl = cylinder_index(fam, K=16)
        pieces = (
            GluePiece("cap_pos", cap_index(POSITIVE, mu_a),
                      (Boundary("a", POSITIVE, "brake", mu_a),)),
            GluePiece("cylinder", cyl,
                      (Boundary("a", NEGATIVE, "brake", mu_a),
                       Boundary("b", POSITIVE, "brake", mu_b))),
            GluePiece("cap_neg", cap_index(NEGATIVE, mu_b),
                      (Boundary("b", NEGATIVE, "brake", mu_b),)),
        )
        ledger = glue(*pieces)
        if ledger.total != one or ledger.open_boundaries:
            fails.append(
                f"({om_a:.3f}, {om_b:.3f}) totals {ledger.total}, "
                f"open={len(ledger.open_boundaries)}"
            )
    if fails:
        return False, "; ".join(fails[:3])
    return True, "cap+ + cylinder + cap- = 1 for 10 random omega pairs"


def _c4_spectral_flow_law():
    rng = np.random.default_rng(4144)
    t0 = time.perf_counter()
    done = 0
    attempts = 0
    fails = []
    while done < 10 and attempts < 60:
        attempts += 1
        n = 2 if done >= 8 else 1
        s_minus = _even_sym(rng, n, 5.0)
        s_plus = _even_sym(rng, n, 5.0)
        lm = SymmetricLoop.constant(s_minus)
        lp = SymmetricLoop.constant(s_plus)
        try:
            flow_brake = spectral_flow(blend_family(lm, lp, domain=BRAKE_DOMAIN), K=32)
            flow_full = spectral_flow(blend_family(lm, lp, domain=FULL), K=32)
            path_m = _exp_path(s_minus)
            path_p = _exp_path(s_plus)
            mu_diff = brake_maslov(path_p) - brake_maslov(path_m)
            cz_diff = conley_zehnder(path_p) - conley_zehnder(path_m)
        except BrakeIndexError:
            continue
        if HalfInt.from_int(flow_brake.value) != mu_diff:
            fails.append(f"brake flow {flow_brake.value} vs mu1 diff {mu_diff}")
        if HalfInt.from_int(flow_full.value) != cz_diff:
            fails.append(f"full flow {flow_full.value} vs cz diff {cz_diff}")
        done += 1
    elapsed = time.perf_counter() - t0
    if done < 10:
        fails.append(f"only {done}/10 families accepted in {attempts} draws")
    if elapsed > 30.0:
        fails.append(f"took {elapsed:.1f}s (budget 30s)")
    if fails:
        return False, "; ".join(fails[:3])
    return True, (f"flow = mu1 and cz differences on 10 families "
                  f"({attempts} draws, {elapsed:.1f}s)")


def _c5_kernel_vs_nullity():
    rng = np.random.default_rng(5150)
    loops = [SymmetricLoop.constant(TWO_PI * np.eye(2)),
             SymmetricLoop.constant(np.diag([1.7, 0.0]))]
    while len(loops) < 20:
        loops.append(_random_brake_loop(rng, 1))
    fails = []
    for idx, loop in enumerate(loops):
        try:
            k_full = kernel_dimension(AsymptoticOperator(loop, FULL), K=16)
            k_brake = kernel_dimension(AsymptoticOperator(loop, BRAKE_DOMAIN), K=16)
        except BrakeIndexError as exc:
            fails.append(f"loop {idx}: {exc}")
            continue
        path = fundamental_solution(loop, (0.0, loop.tau), steps=1024)
        nu, nu1, _ = nullities(path)
        if k_full != nu or k_brake != nu1:
            fails.append(
                f"loop {idx}: kernels ({k_full}, {k_brake}) vs nullities ({nu}, {nu1})"
            )
    degenerate = loops[0]
    k_full = kernel_dimension(AsymptoticOperator(degenerate, FULL), K=16)
    k_brake = kernel_dimension(AsymptoticOperator(degenerate, BRAKE_DOMAIN), K=16)
    if (k_full, k_brake) != (2, 1):
        fails.append(f"omega=2pi kernels ({k_full}, {k_brake}), want (2, 1)")
    if fails:
        return False, "; ".join(fails[:3])
    return True, "kernel dims match nu and nu1 on 20 loops incl. omega=2pi (2, 1)"


def _c6_loop_shifts():
    fails = []
    for omega in (math.pi, 3 * math.pi):
        path = rotation_path(omega, samples=513)
        base_cz = conley_zehnder(path)
        base_mu = brake_maslov(path)
        for k in (-2, -1, 0, 1, 2):
            loop = diagonal_unitary_loop((k,))
            deg = loop_degree(loop)
            if deg != k:
                fails.append(f"degree({k}) = {deg}")
                continue
            shifted_cz = cz_of_product(loop, path)
            shifted_mu = mu1_of_product(loop, path)
            if shifted_cz != HalfInt.from_int(2 * k) + base_cz:
                fails.append(f"cz shift k={k} omega={omega:.2f}: {shifted_cz}")
            if shifted_mu != HalfInt.from_int(k) + base_mu:
                fails.append(f"mu1 shift k={k} omega={omega:.2f}: {shifted_mu}")
    if fails:
        return False, "; ".join(fails[:3])
    return True, "cz jumps by 2k and mu1 by k for k in -2..2 on two rotation paths"


def _c7_nullity_additivity():
    rng = np.random.default_rng(7071)
    n0_cache = {}
    specials = [
        np.asarray(TWO_PI * np.eye(2)),
        np.asarray(2 * TWO_PI * np.eye(2)),
        np.diag([1.7, 0.0]),
        np.diag([TWO_PI, 1.3, TWO_PI, 1.3]),
        np.asarray(math.pi * np.eye(2)),
    ]
    fails = []
    checked = 0
    for idx in range(50):
        if idx < len(specials):
            s = specials[idx]
            n = s.shape[0] // 2
            loop = SymmetricLoop.constant(s)
        else:
            n = 2 if idx % 3 == 0 else 1
            loop = _random_brake_loop(rng, n)
        path = fundamental_solution(loop, (0.0, 1.0), steps=1024)
        res_path = check_brake_symmetry(path)
        if n not in n0_cache:
            n0_cache[n] = brake_involution(n)
        n0 = n0_cache[n]
        g_tau = path.end_value()
        g_half = path.value_at(0.5)
        mono = n0 @ np.linalg.solve(g_half, n0 @ g_half)
        res_mono = float(np.max(np.abs(g_tau - mono)))
        nu, nu1, nu2 = nullities(path)
        if res_path > 1e-6:
            fails.append(f"case {idx}: path symmetry residual {res_path:.2e}")
        if res_mono > 1e-6:
            fails.append(f"case {idx}: monodromy identity residual {res_mono:.2e}")
        if nu1 + nu2 != nu:
            fails.append(f"case {idx}: nu1+nu2 = {nu1}+{nu2} != nu = {nu}")
        checked += 1
    if fails:
        return False, "; ".join(fails[:3])
    return True, f"nu1 + nu2 = nu and brake identities to 1e-6 on {checked} paths"


def _random_records(rng, kind, count):
    out = []
    for i in range(count):
        if kind == BRAKE:
            out.append(OrbitRecord(BRAKE, label=f"q{i}",
                                   mu1=HalfInt(int(rng.integers(-16, 17)))))
        else:
            out.append(OrbitRecord(PAIR, label=f"p{i}",
                                   mu_cz=HalfInt.from_int(int(rng.integers(-8, 9)))))
    return tuple(out)


def _c8_dimension_assembly():
    rng = np.random.default_rng(8192)
    fails = []
    for case in range(100):
        n = int(rng.integers(1, 7))
        genus = int(rng.integers(0, 4))
        spec = ModuliSpec(
            n=n, genus=genus,
            positive_brake=_random_records(rng, BRAKE, int(rng.integers(0, 4))),
            negative_brake=_random_records(rng, BRAKE, int(rng.integers(0, 4))),
            positive_pairs=_random_records(rng, PAIR, int(rng.integers(0, 3))),
            negative_pairs=_random_records(rng, PAIR, int(rng.integers(0, 3))),
        )
        c1 = int(rng.integers(-2, 3))
        sp, sm, tp, tm = spec.counts
        s, t = sp + sm, tp + tm
        assembled = (fredholm_index(spec, c1=c1)
                     + teichmuller_dim(genus, s, t) - aut_dim(genus, s, t))
        sums = HalfInt(0)
        for rec in spec.positive_brake:
            sums = sums + rec.mu1
        for rec in spec.negative_brake:
            sums = sums - rec.mu1
        for rec in spec.positive_pairs:
            sums = sums + rec.mu_cz
        for rec in spec.negative_pairs:
            sums = sums - rec.mu_cz
        closed = (HalfInt((n - 3) * (2 - 2 * genus - s - 2 * t)) + sums
                  + HalfInt.from_int(c1))
        if assembled != closed:
            fails.append(f"case {case}: {assembled} vs closed {closed}")
        report = virtual_dimension(spec, c1=c1)
        if report.virtual != closed:
            fails.append(f"case {case}: report {report.virtual} vs {closed}")
    for case in range(30):
        n = int(rng.integers(1, 7))
        top = _random_records(rng, BRAKE, 1)
        spec = ModuliSpec(
            n=n, genus=0,
            positive_brake=top,
            negative_brake=_random_records(rng, BRAKE, int(rng.integers(0, 4))),
            negative_pairs=_random_records(rng, PAIR, int(rng.integers(0, 3))),
        )
        want = orbit_degree(top[0], n)
        for rec in spec.negative_brake:
            want = want - orbit_degree(rec, n)
        for rec in spec.negative_pairs:
            want = want - orbit_degree(rec, n)
        got = virtual_dimension(spec).virtual
        if got != want:
            fails.append(f"one-positive case {case}: {got} vs degree sum {want}")
    if fails:
        return False, "; ".join(fails[:3])
    return True, "both routes agree on 100 specs; degree form holds on 30 more"


def _c9_brake_orbit_pipeline():
    t0 = time.perf_counter()
    rng = np.random.default_rng(926)
    system = harmonic_system(1)
    q0 = 1.0 + 0.1 * float(rng.standard_normal())
    orbit = find_brake_orbit(system, 0.5, [q0], 6.0, steps=512, tol=1e-9)
    fails = []
    period_err = abs(orbit.period - TWO_PI)
    if period_err > 1e-6:
        fails.append(f"period off by {period_err:.2e}")
    path = linearized_path(orbit, steps=2048)
    res = check_brake_symmetry(path)
    if res > 1e-7:
        fails.append(f"linearized symmetry residual {res:.2e}")
    nu, nu1, nu2 = nullities(path)
    if nu1 != 1:
        fails.append(f"nu1 = {nu1}, want 1")
    mu1 = brake_maslov(path)
    record = OrbitRecord(BRAKE, label="harmonic", mu1=mu1, nullity=(nu, nu1, nu2))
    report = virtual_dimension(ModuliSpec(n=1, genus=0, positive_brake=(record,)))
    if not report.degenerate_input:
        fails.append("degenerate flag not raised")
    elapsed = time.perf_counter() - t0
    if elapsed > 5.0:
        fails.append(f"took {elapsed:.1f}s (budget 5s)")
    if fails:
        return False, "; ".join(fails[:3])
    return True, (f"period 2pi to {period_err:.1e}, symmetry {res:.1e}, "
                  f"nu1 = 1 flagged, mu1 = {mu1} ({elapsed:.1f}s)")


def _c10_classification():
    fails = []
    rows = classify_good_bad(rotation_path(math.pi, samples=513), n=1, max_m=4)
    for row in rows:
        want = HalfInt.from_int(2 * (row.multiplicity // 2) + 1)
        if row.cz != want:
            fails.append(f"elliptic m={row.multiplicity}: cz {row.cz} vs {want}")
        if row.verdict != "good":
            fails.append(f"elliptic m={row.multiplicity} marked {row.verdict}")
    for eps in (0.1, -0.1):
        near = classify_good_bad(rotation_path(math.pi + eps, samples=513),
                                 n=1, max_m=4)
        for row in near:
            if row.verdict != "good" or row.degenerate:
                fails.append(f"near-elliptic eps={eps} m={row.multiplicity}")
    rows = classify_good_bad(hyperbolic_path(-2.0, samples=513), n=1, max_m=4)
    for row in rows:
        if row.cz != HalfInt.from_int(row.multiplicity):
            fails.append(f"neg-hyperbolic m={row.multiplicity}: cz {row.cz}")
        want = "bad" if row.multiplicity % 2 == 0 else "good"
        if row.verdict != want:
            fails.append(
                f"neg-hyperbolic m={row.multiplicity} marked {row.verdict}"
            )
    if fails:
        return False, "; ".join(fails[:4])
    return True, "elliptic covers all good; negative hyperbolic even covers bad"


CRITERIA = (
    (1, "rotation-brake-table", _c1_rotation_table),
    (2, "cap-modes-vs-crossing-form", _c2_cap_vs_crossing),
    (3, "glued-sphere-ledger", _c3_glued_sphere),
    (4, "spectral-flow-law", _c4_spectral_flow_law),
    (5, "kernel-vs-nullity", _c5_kernel_vs_nullity),
    (6, "loop-shift-identities", _c6_loop_shifts),
    (7, "nullity-additivity", _c7_nullity_additivity),
    (8, "dimension-assembly", _c8_dimension_assembly),
    (9, "brake-orbit-pipeline", _c9_brake_orbit_pipeline),
    (10, "good-bad-classification", _c10_classification),
)


@dataclasses.dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.number:2d} {self.name}: {self.detail} [{self.elapsed:.1f}s]"


def run_criterion(number):
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # honest failure, never a crash
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            return CriterionResult(num, name, passed, detail,
                                   time.perf_counter() - t0)
    raise ValueError(f"no criterion numbered {number}")


def run_all(numbers=None):
    wanted = set(numbers) if numbers else {num for num, _, _ in CRITERIA}
    return tuple(run_criterion(num) for num, _, _ in CRITERIA if num in wanted)
