"""Numba hot loops: event-driven spin kinetics and rotator time stepping.

Kernels consume pre-generated random numbers (uniforms for the event clock,
standard normals for the diffusions) from buffers filled by the caller with a
counter-based generator, so results are bit-reproducible regardless of how
the buffers are chunked or which thread runs the kernel.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# return codes of the event kernels
NEED_UNIFORMS = 0
DONE = 1
EVENT_BUFFER_FULL = 2

# layout of the scalar state vectors shared across kernel calls
F_M, F_T = 0, 1
I_GRID, I_UPOS, I_EVPTR, I_EVCOUNT = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def cw_aggregated_kernel(
    counts,        # int64[2, m]; row 0 = spin +1, row 1 = spin -1
    fields,        # float64[m] atom values
    beta,
    inv_n,         # 1/N
    t_end,
    grid,          # float64[G] sorted observation times in [0, t_end]
    snap_counts,   # int64[G, 2, m] output, pre-jump states
    snap_m,        # float64[G] output
    uniforms,      # float64[U] random buffer
    fstate,        # float64[2]: magnetization, current time
    istate,        # int64[4]: grid index, uniform pos, event ptr, event count
    event_times,   # float64[E] (may be length 0)
    event_cells,   # int32[E] channel = row*m + k (may be length 0)
    record_events, # bool
    rates,         # float64[2, m] workspace
):
    """Exact event-driven simulation over the 2m aggregated (spin, field)
    channels.  Flip rate of a cell is count * exp(-beta*j*(m + eta)).

    Returns NEED_UNIFORMS when the random buffer runs dry (call again with a
    fresh buffer), EVENT_BUFFER_FULL when recording and out of space, DONE
    when every grid time has been served.
    """
    m_cells = fields.size
    n_grid = grid.size
    mag = fstate[F_M]
    t = fstate[F_T]
    g = istate[I_GRID]
    upos = istate[I_UPOS]

    while g < n_grid:
        if record_events and istate[I_EVPTR] >= event_times.size:
            # full record buffer: hand back before consuming any randomness
            fstate[F_M] = mag
            fstate[F_T] = t
            istate[I_GRID] = g
            istate[I_UPOS] = upos
            return EVENT_BUFFER_FULL
        total = 0.0
        for k in range(m_cells):
            r_up = counts[0, k] * math.exp(-beta * (mag + fields[k]))
            r_dn = counts[1, k] * math.exp(beta * (mag + fields[k]))
            rates[0, k] = r_up
            rates[1, k] = r_dn
            total += r_up + r_dn
        if total <= 0.0:
            # unreachable for finite beta and N >= 1; guard anyway
            fstate[F_M] = mag
            fstate[F_T] = t
            istate[I_GRID] = g
            istate[I_UPOS] = upos
            return -1
        if upos + 2 > uniforms.size:
            fstate[F_M] = mag
            fstate[F_T] = t
            istate[I_GRID] = g
            istate[I_UPOS] = upos
            return NEED_UNIFORMS
        u = uniforms[upos]
        upos += 1
        if u <= 0.0:
            u = 1e-300
        t_next = t + (-math.log(u) / total)

        # serve observation times passed before the next jump (cadlag value)
        while g < n_grid and grid[g] < t_next:
            for k in range(m_cells):
                snap_counts[g, 0, k] = counts[0, k]
                snap_counts[g, 1, k] = counts[1, k]
            snap_m[g] = mag
            g += 1
        if g >= n_grid:
            break

        # pick the flipping channel proportionally to its rate
        x = uniforms[upos] * total
        upos += 1
        row = 0
        col = 0
        acc = 0.0
        done_pick = False
        for r in range(2):
            for k in range(m_cells):
                acc += rates[r, k]
                if x < acc:
                    row = r
                    col = k
                    done_pick = True
                    break
            if done_pick:
                break
        counts[row, col] -= 1
        counts[1 - row, col] += 1
        mag += (-2.0 * inv_n) if row == 0 else (2.0 * inv_n)
        t = t_next
        istate[I_EVCOUNT] += 1
        if record_events:
            p = istate[I_EVPTR]
            event_times[p] = t
            event_cells[p] = row * m_cells + col
            istate[I_EVPTR] = p + 1

        # counteract float drift of the cached magnetization
        if istate[I_EVCOUNT] % 1_048_576 == 0:
            s = 0
            for k in range(m_cells):
                s += counts[0, k] - counts[1, k]
            mag = s * inv_n

    fstate[F_M] = mag
    fstate[F_T] = t
    istate[I_GRID] = g
    istate[I_UPOS] = upos
    return DONE


@njit(cache=True, nogil=True)
def cw_site_kernel(
    spins,        # int8[N] in {-1, +1}
    fields,       # float64[N] per-site field values
    beta,
    t_end,
    uniforms,     # float64[U]
    fstate,       # float64[2]: magnetization, time
    istate,       # int64[4]: unused, uniform pos, unused, event count
    occupation,   # float64[2**N] time spent per configuration (may be empty)
    track_occupation,
    grid,         # float64[G]
    snap_m,       # float64[G]
    rates,        # float64[N] workspace
):
    """Per-site event-driven simulation (oracle for small N).

    Configurations are indexed by the bitmask of up spins when occupation
    tracking is on.  Snapshots record only the magnetization.
    """
    n = spins.size
    inv_n = 1.0 / n
    mag = fstate[F_M]
    t = fstate[F_T]
    upos = istate[I_UPOS]
    g = istate[I_GRID]

    config = 0
    if track_occupation:
        for j in range(n):
            if spins[j] > 0:
                config |= 1 << j

    while t < t_end:
        total = 0.0
        for j in range(n):
            r = math.exp(-beta * spins[j] * (mag + fields[j]))
            rates[j] = r
            total += r
        if upos + 2 > uniforms.size:
            fstate[F_M] = mag
            fstate[F_T] = t
            istate[I_UPOS] = upos
            istate[I_GRID] = g
            return NEED_UNIFORMS
        u = uniforms[upos]
        upos += 1
        if u <= 0.0:
            u = 1e-300
        t_next = t + (-math.log(u) / total)

        while g < grid.size and grid[g] < t_next:
            snap_m[g] = mag
            g += 1

        if track_occupation:
            occupation[config] += min(t_next, t_end) - t
        if t_next >= t_end and g >= grid.size:
            t = t_end
            break

        x = uniforms[upos] * total
        upos += 1
        acc = 0.0
        site = n - 1
        for j in range(n):
            acc += rates[j]
            if x < acc:
                site = j
                break
        mag -= 2.0 * spins[site] * inv_n
        spins[site] = -spins[site]
        if track_occupation:
            config ^= 1 << site
        t = t_next
        istate[I_EVCOUNT] += 1

    fstate[F_M] = mag
    fstate[F_T] = t
    istate[I_UPOS] = upos
    istate[I_GRID] = g
    return DONE


@njit(cache=True, nogil=True, fastmath=True)
def kuramoto_em_chunk(
    x,          # float64[N] angles, updated in place
    drift_eta,  # float64[N] = omega * eta_j, precomputed
    theta,
    dt,
    noise,      # float64[steps, N] standard normals (zeroed for the no-noise hook)
    wrap,       # bool
    cwork,      # float64[N]
    swork,      # float64[N]
    heun,       # bool: drift-midpoint corrector (weak order 2, additive noise)
):
    """Time steps of the mean-field rotator diffusion.

    The pair interaction is reduced to the coherence sums: with
    C = mean cos x_k and S = mean sin x_k,
    (1/N) sum_k sin(x_k - x_j) = S cos x_j - C sin x_j, giving O(N) per step.
    Noise variance is dt per coordinate (unit-diffusion Brownian motions).

    With ``heun`` the drift is averaged between the current state and an
    Euler predictor (same Gaussian increment).  The plain Euler drift bias
    is O(dt) per unit time; the critical time dilation integrates it over
    microscopic spans growing with N, where the corrector keeps the
    distributional error flat in N at fixed dt.
    """
    n = x.size
    steps = noise.shape[0]
    sq = math.sqrt(dt)
    pred = np.empty(n)
    for s_i in range(steps):
        csum = 0.0
        ssum = 0.0
        for j in range(n):
            c = math.cos(x[j])
            s = math.sin(x[j])
            cwork[j] = c
            swork[j] = s
            csum += c
            ssum += s
        cmean = csum / n
        smean = ssum / n
        if not heun:
            for j in range(n):
                drift = drift_eta[j] + theta * (smean * cwork[j] - cmean * swork[j])
                xj = x[j] + drift * dt + sq * noise[s_i, j]
                if wrap:
                    xj = xj - math.floor(xj / TWO_PI) * TWO_PI
                x[j] = xj
        else:
            c2sum = 0.0
            s2sum = 0.0
            for j in range(n):
                drift = drift_eta[j] + theta * (smean * cwork[j] - cmean * swork[j])
                pj = x[j] + drift * dt + sq * noise[s_i, j]
                pred[j] = pj
                c2sum += math.cos(pj)
                s2sum += math.sin(pj)
            c2mean = c2sum / n
            s2mean = s2sum / n
            for j in range(n):
                d1 = drift_eta[j] + theta * (smean * cwork[j] - cmean * swork[j])
                cp = math.cos(pred[j])
                sp = math.sin(pred[j])
                d2 = drift_eta[j] + theta * (s2mean * cp - c2mean * sp)
                xj = x[j] + 0.5 * (d1 + d2) * dt + sq * noise[s_i, j]
                if wrap:
                    xj = xj - math.floor(xj / TWO_PI) * TWO_PI
                x[j] = xj


@njit(cache=True, nogil=True)
def _pairwise_drift(x, drift_eta, theta):
    n = x.size
    out = np.empty(n)
    for j in range(n):
        pair = 0.0
        for k in range(n):
            pair += math.sin(x[k] - x[j])
        out[j] = drift_eta[j] + theta * pair / n
    return out


@njit(cache=True, nogil=True)
def kuramoto_pairwise_step(x, drift_eta, theta, dt, noise_row, wrap, heun):
    """One step with the O(N^2) pairwise drift sum.

    Reference implementation used to certify the coherence-sum reduction;
    mirrors the production scheme (Euler predictor plus optional drift
    midpoint)."""
    n = x.size
    sq = math.sqrt(dt)
    d1 = _pairwise_drift(x, drift_eta, theta)
    out = np.empty(n)
    if not heun:
        for j in range(n):
            out[j] = x[j] + d1[j] * dt + sq * noise_row[j]
    else:
        pred = np.empty(n)
        for j in range(n):
            pred[j] = x[j] + d1[j] * dt + sq * noise_row[j]
        d2 = _pairwise_drift(pred, drift_eta, theta)
        for j in range(n):
            out[j] = x[j] + 0.5 * (d1[j] + d2[j]) * dt + sq * noise_row[j]
    if wrap:
        for j in range(n):
            out[j] = out[j] - math.floor(out[j] / TWO_PI) * TWO_PI
    return out


@njit(cache=True, nogil=True)
def cubic_sde_2d_chunk(
    v1, v2,       # float64[P] coordinates per path, updated in place
    c_drift,
    dt,
    noise1, noise2,  # float64[steps, P], pre-scaled by the noise amplitude
    tame,            # bool: drift / (1 + dt*|drift|), ergodic regime only
    stop_radius2,    # squared stopping radius, or inf
    stopped_step,    # int64[P], -1 while running; first step index at/after crossing
    step_offset,     # global index of the first step in this chunk
):
    """Euler-Maruyama for the planar cubic diffusion
    dV_i = -c V_i |V|^2 dt + sigma dW_i, with optional drift taming and
    radial stopping at the first grid crossing."""
    paths = v1.size
    steps = noise1.shape[0]
    sq = math.sqrt(dt)
    for s_i in range(steps):
        for p in range(paths):
            if stopped_step[p] >= 0:
                continue
            r2 = v1[p] * v1[p] + v2[p] * v2[p]
            d1 = -c_drift * v1[p] * r2
            d2 = -c_drift * v2[p] * r2
            if tame:
                mag = math.sqrt(d1 * d1 + d2 * d2)
                scale = 1.0 / (1.0 + dt * mag)
                d1 *= scale
                d2 *= scale
            v1[p] += d1 * dt + sq * noise1[s_i, p]
            v2[p] += d2 * dt + sq * noise2[s_i, p]
            if v1[p] * v1[p] + v2[p] * v2[p] >= stop_radius2:
                stopped_step[p] = step_offset + s_i + 1


@njit(cache=True, nogil=True)
def cubic_sde_1d_chunk(y, dt, noise, tame):
    """Euler-Maruyama for dY = -(2/3) Y^3 dt + 2 dW over one noise chunk."""
    paths = y.size
    steps = noise.shape[0]
    sq = 2.0 * math.sqrt(dt)
    for s_i in range(steps):
        for p in range(paths):
            d = -(2.0 / 3.0) * y[p] ** 3
            if tame:
                d /= 1.0 + dt * abs(d)
            y[p] += d * dt + sq * noise[s_i, p]


@njit(cache=True, nogil=True)
def harmonic_sums(x, eta, h_max):
    """Per-harmonic empirical sums flat over particles.

    Returns out[h-1] = (sum cos hx, sum sin hx, sum eta cos hx, sum eta sin hx)
    for h = 1..h_max, computed with the Chebyshev recurrence so each particle
    costs two trig calls total.
    """
    n = x.size
    out = np.zeros((h_max, 4))
    for j in range(n):
        c1 = math.cos(x[j])
        s1 = math.sin(x[j])
        e = eta[j]
        c_prev = 1.0
        s_prev = 0.0
        c = c1
        s = s1
        for h in range(1, h_max + 1):
            out[h - 1, 0] += c
            out[h - 1, 1] += s
            out[h - 1, 2] += e * c
            out[h - 1, 3] += e * s
            c_next = 2.0 * c1 * c - c_prev
            s_next = 2.0 * c1 * s - s_prev
            c_prev = c
            s_prev = s
            c = c_next
            s = s_next
    return out
