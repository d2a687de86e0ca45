"""Numba-compiled inner loops for the network forward/backward passes.

These kernels are the single implementation of the model math: the public
forward/gradient functions and the per-sample training loops all call the
same code, so the finite-difference checks exercise exactly what training
uses.  Everything is float64; activation is passed as an integer code.
"""

import math

from numba import njit

ACT_LINEAR = 0
ACT_SIGMOID = 1


@njit(cache=True)
def _sig(z):
    # stable logistic; argument already scaled by the steepness
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _out_act(z, lam, act):
    if act == ACT_SIGMOID:
        return _sig(lam * z)
    return z


# ---------------------------------------------------------------------------
# feed-forward network: d_in -> hidden (sigmoid) -> 1
# ---------------------------------------------------------------------------


@njit(cache=True)
def ffnn_forward_kernel(w_ih, w_ho, lam, act, g, h):
    """Fill `h` (hidden,) and return the scalar output."""
    d, nh = w_ih.shape
    for k in range(nh):
        s = 0.0
        for j in range(d):
            s += g[j] * w_ih[j, k]
        h[k] = _sig(lam * s)
    z = 0.0
    for k in range(nh):
        z += h[k] * w_ho[k, 0]
    return _out_act(z, lam, act)


@njit(cache=True)
def ffnn_backward_kernel(w_ih, w_ho, lam, act, g, target, gih, gho, h):
    """Exact gradients of (o - target)^2; fills gih/gho, returns o."""
    o = ffnn_forward_kernel(w_ih, w_ho, lam, act, g, h)
    d, nh = w_ih.shape
    dout = 2.0 * (o - target)
    if act == ACT_SIGMOID:
        dout *= lam * o * (1.0 - o)
    for k in range(nh):
        gho[k, 0] = dout * h[k]
        dk = dout * w_ho[k, 0] * lam * h[k] * (1.0 - h[k])
        for j in range(d):
            gih[j, k] = dk * g[j]
    return o


@njit(cache=True)
def ffnn_epoch_kernel(w_ih, w_ho, lam, act, xs, ys, order, eta, gih, gho, h):
    """One pass of per-sample steepest-descent updates in the given order."""
    d, nh = w_ih.shape
    for oi in range(order.shape[0]):
        i = order[oi]
        ffnn_backward_kernel(w_ih, w_ho, lam, act, xs[i], ys[i], gih, gho, h)
        for j in range(d):
            for k in range(nh):
                w_ih[j, k] -= eta * gih[j, k]
        for k in range(nh):
            w_ho[k, 0] -= eta * gho[k, 0]


@njit(cache=True)
def ffnn_mean_loss_kernel(w_ih, w_ho, lam, act, xs, ys, h):
    total = 0.0
    for i in range(xs.shape[0]):
        o = ffnn_forward_kernel(w_ih, w_ho, lam, act, xs[i], h)
        e = o - ys[i]
        total += e * e
    return total / xs.shape[0]


# ---------------------------------------------------------------------------
# simple recurrent network, error injected at the final step only
# ---------------------------------------------------------------------------


@njit(cache=True)
def rnn_forward_kernel(w_ih, w_hh, w_ho, lam, act, seq, hs):
    """Fill hs (T, hidden) with hidden states (h^0 = 0) and return the output."""
    t_len, d = seq.shape
    nh = w_hh.shape[0]
    for t in range(t_len):
        for k in range(nh):
            s = 0.0
            for j in range(d):
                s += seq[t, j] * w_ih[j, k]
            if t > 0:
                for i in range(nh):
                    s += hs[t - 1, i] * w_hh[i, k]
            hs[t, k] = _sig(lam * s)
    z = 0.0
    for k in range(nh):
        z += hs[t_len - 1, k] * w_ho[k, 0]
    return _out_act(z, lam, act)


@njit(cache=True)
def rnn_bptt_kernel(w_ih, w_hh, w_ho, lam, act, seq, target,
                    gih, ghh, gho, hs, delta, delta_prev):
    """Backprop through time for (o - target)^2; fills the grads, returns o."""
    o = rnn_forward_kernel(w_ih, w_hh, w_ho, lam, act, seq, hs)
    t_len, d = seq.shape
    nh = w_hh.shape[0]
    dout = 2.0 * (o - target)
    if act == ACT_SIGMOID:
        dout *= lam * o * (1.0 - o)
    for j in range(d):
        for k in range(nh):
            gih[j, k] = 0.0
    for i in range(nh):
        for k in range(nh):
            ghh[i, k] = 0.0
    for k in range(nh):
        gho[k, 0] = dout * hs[t_len - 1, k]
        # factor order matches the ffnn kernel so T=1 reduces to it exactly
        delta[k] = dout * w_ho[k, 0] * lam * hs[t_len - 1, k] * (1.0 - hs[t_len - 1, k])
    t = t_len - 1
    while True:
        for k in range(nh):
            dk = delta[k]
            for j in range(d):
                gih[j, k] += dk * seq[t, j]
            if t > 0:  # feedback grads accumulate for steps 2..T only
                for i in range(nh):
                    ghh[i, k] += dk * hs[t - 1, i]
        if t == 0:
            break
        for i in range(nh):
            s = 0.0
            for k in range(nh):
                s += delta[k] * w_hh[i, k]
            delta_prev[i] = lam * hs[t - 1, i] * (1.0 - hs[t - 1, i]) * s
        for i in range(nh):
            delta[i] = delta_prev[i]
        t -= 1
    return o


@njit(cache=True)
def rnn_epoch_kernel(w_ih, w_hh, w_ho, lam, act, flat_x, offsets, lengths, targets,
                     order, eta, clip_cap, gih, ghh, gho, hs, delta, delta_prev):
    """One pass of per-clip BPTT updates; clip_cap <= 0 disables clipping."""
    d, nh = w_ih.shape
    for oi in range(order.shape[0]):
        ci = order[oi]
        seq = flat_x[offsets[ci]:offsets[ci] + lengths[ci]]
        rnn_bptt_kernel(w_ih, w_hh, w_ho, lam, act, seq, targets[ci],
                        gih, ghh, gho, hs, delta, delta_prev)
        scale = 1.0
        if clip_cap > 0.0:
            m = 0.0
            for j in range(d):
                for k in range(nh):
                    a = abs(gih[j, k])
                    if a > m:
                        m = a
            for i in range(nh):
                for k in range(nh):
                    a = abs(ghh[i, k])
                    if a > m:
                        m = a
            for k in range(nh):
                a = abs(gho[k, 0])
                if a > m:
                    m = a
            if m > clip_cap:
                scale = clip_cap / m
        for j in range(d):
            for k in range(nh):
                w_ih[j, k] -= eta * scale * gih[j, k]
        for i in range(nh):
            for k in range(nh):
                w_hh[i, k] -= eta * scale * ghh[i, k]
        for k in range(nh):
            w_ho[k, 0] -= eta * scale * gho[k, 0]


@njit(cache=True)
def rnn_mean_loss_kernel(w_ih, w_hh, w_ho, lam, act, flat_x, offsets, lengths,
                         targets, hs):
    total = 0.0
    n = offsets.shape[0]
    for ci in range(n):
        seq = flat_x[offsets[ci]:offsets[ci] + lengths[ci]]
        o = rnn_forward_kernel(w_ih, w_hh, w_ho, lam, act, seq, hs)
        e = o - targets[ci]
        total += e * e
    return total / n


# ---------------------------------------------------------------------------
# LSTM cell (conventional single-layer formulation; gates use steepness 1)
# ---------------------------------------------------------------------------


@njit(cache=True)
def lstm_cell_forward_kernel(w_xi, w_hi, b_i, w_xf, w_hf, b_f,
                             w_xo, w_ho, b_o, w_xc, w_hc, b_c,
                             seq, ig, fg, og, gg, cs, hs):
    """Run the cell over seq (T, d); fills gate/cell/hidden caches (T, hidden)."""
    t_len, d = seq.shape
    nh = b_i.shape[0]
    for t in range(t_len):
        for k in range(nh):
            si = b_i[k]
            sf = b_f[k]
            so = b_o[k]
            sc = b_c[k]
            for j in range(d):
                x = seq[t, j]
                si += x * w_xi[j, k]
                sf += x * w_xf[j, k]
                so += x * w_xo[j, k]
                sc += x * w_xc[j, k]
            if t > 0:
                for i in range(nh):
                    hp = hs[t - 1, i]
                    si += hp * w_hi[i, k]
                    sf += hp * w_hf[i, k]
                    so += hp * w_ho[i, k]
                    sc += hp * w_hc[i, k]
            ivt = _sig(si)
            fvt = _sig(sf)
            ovt = _sig(so)
            gvt = math.tanh(sc)
            cprev = cs[t - 1, k] if t > 0 else 0.0
            cvt = fvt * cprev + ivt * gvt
            ig[t, k] = ivt
            fg[t, k] = fvt
            og[t, k] = ovt
            gg[t, k] = gvt
            cs[t, k] = cvt
            hs[t, k] = ovt * math.tanh(cvt)


@njit(cache=True)
def lstm_cell_backward_kernel(w_hi, w_hf, w_ho, w_hc,
                              seq, ig, fg, og, gg, cs, hs, dh_last,
                              g_xi, g_hi, g_bi, g_xf, g_hf, g_bf,
                              g_xo, g_ho, g_bo, g_xc, g_hc, g_bc,
                              dh, dc, dai, daf, dao, dac):
    """BPTT through the cell with error arriving only at the final hidden state."""
    t_len, d = seq.shape
    nh = dh_last.shape[0]
    g_xi[:] = 0.0
    g_hi[:] = 0.0
    g_bi[:] = 0.0
    g_xf[:] = 0.0
    g_hf[:] = 0.0
    g_bf[:] = 0.0
    g_xo[:] = 0.0
    g_ho[:] = 0.0
    g_bo[:] = 0.0
    g_xc[:] = 0.0
    g_hc[:] = 0.0
    g_bc[:] = 0.0
    for k in range(nh):
        dh[k] = dh_last[k]
        dc[k] = 0.0
    for t in range(t_len - 1, -1, -1):
        for k in range(nh):
            tc = math.tanh(cs[t, k])
            do_ = dh[k] * tc
            dct = dc[k] + dh[k] * og[t, k] * (1.0 - tc * tc)
            cprev = cs[t - 1, k] if t > 0 else 0.0
            di = dct * gg[t, k]
            df = dct * cprev
            dg = dct * ig[t, k]
            dai[k] = di * ig[t, k] * (1.0 - ig[t, k])
            daf[k] = df * fg[t, k] * (1.0 - fg[t, k])
            dao[k] = do_ * og[t, k] * (1.0 - og[t, k])
            dac[k] = dg * (1.0 - gg[t, k] * gg[t, k])
            dc[k] = dct * fg[t, k]
            g_bi[k] += dai[k]
            g_bf[k] += daf[k]
            g_bo[k] += dao[k]
            g_bc[k] += dac[k]
            for j in range(d):
                x = seq[t, j]
                g_xi[j, k] += dai[k] * x
                g_xf[j, k] += daf[k] * x
                g_xo[j, k] += dao[k] * x
                g_xc[j, k] += dac[k] * x
            if t > 0:
                for i in range(nh):
                    hp = hs[t - 1, i]
                    g_hi[i, k] += dai[k] * hp
                    g_hf[i, k] += daf[k] * hp
                    g_ho[i, k] += dao[k] * hp
                    g_hc[i, k] += dac[k] * hp
        if t > 0:
            for i in range(nh):
                s = 0.0
                for k in range(nh):
                    s += dai[k] * w_hi[i, k] + daf[k] * w_hf[i, k] \
                        + dao[k] * w_ho[i, k] + dac[k] * w_hc[i, k]
                dh[i] = s
