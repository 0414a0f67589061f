"""Hot numeric kernels, compiled with numba or interpreted (PGG_NO_NUMBA=1).

Everything here operates on flat arrays (CSR adjacency: indptr int64[n+1],
indices int64[sum deg]; profiles int8; masks bool) so the same source compiles
under numba and runs unchanged under the interpreter. Float reductions are
written as explicit loops, never np.sum/np.mean, so both backends accumulate
in the same order and produce bit-identical results.

The stream generator is xoshiro256++ over a uint64[4] state array (created by
``rng.stream_state``). It exists in two sources: wrapped-uint64 arithmetic for
the compiled path and masked-Python-int arithmetic for the interpreted path
(numpy 2.x warns on uint64 scalar overflow). test_rng pins both against the
interpreted ``rng.Stream``.
"""

import numpy as np

from .backend import USING_NUMBA, jit

OBJ_SW_CODE = 0
OBJ_FAIR_CODE = 1

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


# ---------------------------------------------------------------------------
# stream rng, compiled source (wrapped uint64; silent overflow under numba)
# ---------------------------------------------------------------------------

def _rng_next_u64_src(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    x = s0 + s3
    r = ((x << np.uint64(23)) | (x >> np.uint64(41))) + s0
    t = s1 << np.uint64(17)
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return r


def _rng_uniform_u64_src(s):
    return float(rng_next(s) >> np.uint64(11)) * _INV_2_53


def _rng_below_u64_src(s, n):
    return int(rng_uniform(s) * n)


# ---------------------------------------------------------------------------
# stream rng, interpreted source (masked Python ints)
# ---------------------------------------------------------------------------

def _rng_next_py(s):
    s0 = int(s[0])
    s1 = int(s[1])
    s2 = int(s[2])
    s3 = int(s[3])
    x = (s0 + s3) & _MASK64
    r = ((((x << 23) & _MASK64) | (x >> 41)) + s0) & _MASK64
    t = (s1 << 17) & _MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = ((s3 << 45) & _MASK64) | (s3 >> 19)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return r


def _rng_uniform_py(s):
    return (_rng_next_py(s) >> 11) * _INV_2_53


def _rng_below_py(s, n):
    return int(_rng_uniform_py(s) * n)


if USING_NUMBA:
    rng_next = jit(_rng_next_u64_src)
    rng_uniform = jit(_rng_uniform_u64_src)
    rng_below = jit(_rng_below_u64_src)
else:
    rng_next = _rng_next_py
    rng_uniform = _rng_uniform_py
    rng_below = _rng_below_py


# ---------------------------------------------------------------------------
# game primitives
# ---------------------------------------------------------------------------

@jit
def profile_utilities(indptr, indices, costs, profile, out):
    """Utilities of an arbitrary action profile (investors keep 1-c)."""
    n = profile.shape[0]
    for i in range(n):
        if profile[i] == 1:
            out[i] = 1.0 - costs[i]
        else:
            cov = False
            for k in range(indptr[i], indptr[i + 1]):
                if profile[indices[k]] == 1:
                    cov = True
                    break
            out[i] = 1.0 if cov else 0.0


@jit
def profile_objective(indptr, indices, costs, profile, obj_code):
    """Mean utility (code 0) or the Gini-complement fairness index (code 1)."""
    n = profile.shape[0]
    u = np.empty(n, np.float64)
    profile_utilities(indptr, indices, costs, profile, u)
    if obj_code == OBJ_SW_CODE:
        tot = 0.0
        for i in range(n):
            tot += u[i]
        return tot / n
    tot = 0.0
    for i in range(n):
        tot += u[i]
    if tot <= 0.0:
        return 1.0  # all-zero utilities: maximally equal by convention
    us = np.sort(u)
    acc = 0.0
    for k in range(n):
        acc += (2.0 * (k + 1) - n - 1.0) * us[k]
    # sum_ij |u_i - u_j| equals 2*acc for ascending us
    return 1.0 - (2.0 * acc) / (2.0 * n * tot)


@jit
def mdp_apply(indptr, indices, blocked, profile, v):
    """Add vertex v to the set: invest and block its closed neighborhood."""
    profile[v] = 1
    blocked[v] = True
    for k in range(indptr[v], indptr[v + 1]):
        blocked[indices[k]] = True


@jit
def count_unblocked(blocked):
    n = blocked.shape[0]
    c = 0
    for v in range(n):
        if not blocked[v]:
            c += 1
    return c


@jit
def random_complete(indptr, indices, blocked, profile, rng_state):
    """Uniform random completion to a maximal independent set, in place.

    Lazy available-list: stale (newly blocked) entries are swap-removed when
    drawn, so each vertex is touched O(1) times beyond its removal.
    """
    n = blocked.shape[0]
    avail = np.empty(n, np.int64)
    m = 0
    for v in range(n):
        if not blocked[v]:
            avail[m] = v
            m += 1
    while m > 0:
        idx = rng_below(rng_state, m)
        v = avail[idx]
        m -= 1
        avail[idx] = avail[m]
        if blocked[v]:
            continue
        mdp_apply(indptr, indices, blocked, profile, v)


@jit
def static_score_rollout(indptr, indices, scores, blocked, profile):
    """Deterministic completion: repeatedly take the highest-score valid
    vertex (ties to the lowest index)."""
    n = blocked.shape[0]
    while True:
        best_v = -1
        best = -1.0e300
        for v in range(n):
            if not blocked[v] and scores[v] > best:
                best = scores[v]
                best_v = v
        if best_v < 0:
            break
        mdp_apply(indptr, indices, blocked, profile, best_v)


# ---------------------------------------------------------------------------
# best-response dynamics and annealing
# ---------------------------------------------------------------------------

@jit
def br_dynamics(indptr, indices, profile, pinned, rng_state, max_sweeps):
    """Sequential best-response sweeps, fresh random player order per sweep.

    Invest iff no neighbor invests; pinned players never update. Returns the
    number of sweeps used (the final no-change sweep included), or -1 if
    max_sweeps elapsed without convergence.
    """
    n = profile.shape[0]
    order = np.empty(n, np.int64)
    for i in range(n):
        order[i] = i
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        for i in range(n - 1, 0, -1):
            j = rng_below(rng_state, i + 1)
            t = order[i]
            order[i] = order[j]
            order[j] = t
        changed = False
        for t_ in range(n):
            i = order[t_]
            if pinned[i]:
                continue
            cov = False
            for k in range(indptr[i], indptr[i + 1]):
                if profile[indices[k]] == 1:
                    cov = True
                    break
            want = 0 if cov else 1
            if profile[i] != want:
                profile[i] = want
                changed = True
        if not changed:
            return sweeps
    return -1


@jit
def sa_search(indptr, indices, costs, obj_code, epsilon,
              no_improve_limit, step_cutoff, rng_state,
              profile_out, trace_out):
    """Metropolis-perturbed best-response search over equilibria.

    Start: BR from a Bernoulli(1/2) profile. Each proposal forces a uniformly
    random non-investor to invest, re-stabilizes by BR (forced player pinned,
    then released), and accepts if df >= 0, else with prob exp(epsilon*df).
    Stops after no_improve_limit proposals without improving the best-so-far,
    or at step_cutoff proposals. Best profile lands in profile_out; best-value
    trace (per proposal) fills trace_out while it has room.

    Returns (best_value, proposals_done).
    """
    n = profile_out.shape[0]
    pinned = np.zeros(n, np.bool_)
    cur = np.empty(n, np.int8)
    for i in range(n):
        cur[i] = 1 if rng_uniform(rng_state) < 0.5 else 0
    br_dynamics(indptr, indices, cur, pinned, rng_state, 10 * n)
    f_cur = profile_objective(indptr, indices, costs, cur, obj_code)
    best = cur.copy()
    f_best = f_cur
    trial = np.empty(n, np.int8)
    tcap = trace_out.shape[0]
    steps = 0
    since_improve = 0
    while since_improve < no_improve_limit and steps < step_cutoff:
        zeros = 0
        for i in range(n):
            if cur[i] == 0:
                zeros += 1
        if zeros == 0:
            break  # nothing to perturb (edgeless graph, everyone invests)
        pick = rng_below(rng_state, zeros)
        p = -1
        seen = 0
        for i in range(n):
            if cur[i] == 0:
                if seen == pick:
                    p = i
                    break
                seen += 1
        trial[:] = cur
        trial[p] = 1
        pinned[p] = True
        br_dynamics(indptr, indices, trial, pinned, rng_state, 10 * n)
        pinned[p] = False
        br_dynamics(indptr, indices, trial, pinned, rng_state, 10 * n)
        f_new = profile_objective(indptr, indices, costs, trial, obj_code)
        steps += 1
        df = f_new - f_cur
        if df >= 0.0 or rng_uniform(rng_state) < np.exp(epsilon * df):
            cur[:] = trial
            f_cur = f_new
        if f_new > f_best:
            f_best = f_new
            best[:] = trial
            since_improve = 0
        else:
            since_improve += 1
        if steps <= tcap:
            trace_out[steps - 1] = f_best
    profile_out[:] = best
    return f_best, steps


# ---------------------------------------------------------------------------
# UCT search
# ---------------------------------------------------------------------------

@jit
def uct_search(indptr, indices, costs, obj_code,
               root_blocked, root_profile, n_sims, cp_eff, random_ties,
               rng_state, out_visits, out_returns):
    """One search of n_sims simulations from the given root state.

    Flat-array tree, one new child per simulation (lowest-index untried
    action), uniform random rollouts, full-return backups. Selection score is
    mean return + 2*cp_eff*sqrt(2*ln(parent visits)/child visits); unexpanded
    children are taken first, score ties go to the lowest index unless
    random_ties. Root child visit counts and summed returns land in
    out_visits/out_returns (indexed by vertex); returns the sum of all
    backed-up returns at the root.
    """
    n = root_profile.shape[0]
    cap = n_sims + 2
    node_visits = np.zeros(cap, np.int64)
    node_valid = np.full(cap, -1, np.int64)
    node_expanded = np.zeros(cap, np.int64)
    node_cursor = np.zeros(cap, np.int64)
    child_visits = np.zeros((cap, n), np.int64)
    child_returns = np.zeros((cap, n), np.float64)
    child_id = np.full((cap, n), -1, np.int64)
    next_node = 1

    blocked = np.empty(n, np.bool_)
    profile = np.empty(n, np.int8)
    path_nodes = np.empty(n + 1, np.int64)
    path_acts = np.empty(n + 1, np.int64)

    total_return = 0.0
    for _sim in range(n_sims):
        blocked[:] = root_blocked
        profile[:] = root_profile
        cur = 0
        depth = 0
        value = 0.0
        while True:
            nv = node_valid[cur]
            if nv == -1:
                nv = count_unblocked(blocked)
                node_valid[cur] = nv
            if nv == 0:
                # terminal state reached inside the tree
                value = profile_objective(indptr, indices, costs, profile, obj_code)
                break
            if node_expanded[cur] < nv:
                v = node_cursor[cur]
                while blocked[v]:
                    v += 1
                node_cursor[cur] = v + 1
                node_expanded[cur] += 1
                nid = next_node
                next_node += 1
                child_id[cur, v] = nid
                path_nodes[depth] = cur
                path_acts[depth] = v
                depth += 1
                mdp_apply(indptr, indices, blocked, profile, v)
                cur = nid
                random_complete(indptr, indices, blocked, profile, rng_state)
                value = profile_objective(indptr, indices, costs, profile, obj_code)
                break
            log_parent = np.log(float(node_visits[cur]))
            best_v = -1
            best_score = -1.0e300
            n_tied = 0
            for v in range(n):
                if blocked[v]:
                    continue
                cv = child_visits[cur, v]
                score = child_returns[cur, v] / cv \
                    + 2.0 * cp_eff * np.sqrt(2.0 * log_parent / cv)
                if score > best_score:
                    best_score = score
                    best_v = v
                    n_tied = 1
                elif random_ties and score == best_score:
                    n_tied += 1
                    if rng_uniform(rng_state) * n_tied < 1.0:
                        best_v = v
            path_nodes[depth] = cur
            path_acts[depth] = best_v
            depth += 1
            mdp_apply(indptr, indices, blocked, profile, best_v)
            cur = child_id[cur, best_v]
        for d in range(depth):
            nd = path_nodes[d]
            node_visits[nd] += 1
            child_visits[nd, path_acts[d]] += 1
            child_returns[nd, path_acts[d]] += value
        node_visits[cur] += 1
        total_return += value
    for v in range(n):
        out_visits[v] = child_visits[0, v]
        out_returns[v] = child_returns[0, v]
    return total_return


# ---------------------------------------------------------------------------
# policy network inference
# ---------------------------------------------------------------------------

@jit
def gil_scores(indptr, indices, in_set, w_node, w_agg, w_hid, w_out, K, M, M2):
    """Euclidean distances between node embeddings and the proto-action.

    K propagation rounds of mu <- relu(x W_node + (sum_neighbors mu) W_agg)
    with zero-initialized embeddings; features are one-hot in/out of the set,
    so round 1 reduces to the feature rows. M and M2 are (n, e) scratch; the
    final embeddings stay in M. Returns distances for every vertex.
    """
    n = in_set.shape[0]
    e = w_agg.shape[0]
    for i in range(n):
        row = 0 if in_set[i] else 1
        for j in range(e):
            z = w_node[row, j]
            M[i, j] = z if z > 0.0 else 0.0
    full = K - 2
    if K > 1:
        # round-1 embeddings take only two values (in or out of the set),
        # so this round's aggregated term is rank 2; neighbor counts suffice
        r0 = np.empty(e, np.float64)
        r1 = np.empty(e, np.float64)
        for j in range(e):
            z = w_node[0, j]
            r0[j] = z if z > 0.0 else 0.0
            z = w_node[1, j]
            r1[j] = z if z > 0.0 else 0.0
        a0 = np.dot(r0, w_agg)
        a1 = np.dot(r1, w_agg)
        cin = np.empty(n, np.float64)
        cout = np.empty(n, np.float64)
        for i in range(n):
            ci = 0.0
            co = 0.0
            for kk in range(indptr[i], indptr[i + 1]):
                if in_set[indices[kk]]:
                    ci += 1.0
                else:
                    co += 1.0
            cin[i] = ci
            cout[i] = co
        if K == 2:
            for i in range(n):
                row = 0 if in_set[i] else 1
                for j in range(e):
                    z = cin[i] * a0[j] + cout[i] * a1[j] + w_node[row, j]
                    M[i, j] = z if z > 0.0 else 0.0
        else:
            # round-2 rows are determined by (membership, in-count, out-count);
            # one row per distinct triple through w_agg, round 3 gathers the
            # products instead of paying the full n-row matmul
            codes = np.empty(n, np.int64)
            base = np.int64(n + 1)
            for i in range(n):
                ri = np.int64(0) if in_set[i] else np.int64(1)
                codes[i] = (ri * base + np.int64(cin[i])) * base \
                    + np.int64(cout[i])
            order = np.argsort(codes)
            cid = np.empty(n, np.int64)
            cid[order[0]] = 0
            q = 0
            prev = codes[order[0]]
            for t in range(1, n):
                i2 = order[t]
                if codes[i2] != prev:
                    q += 1
                    prev = codes[i2]
                cid[i2] = q
            q += 1
            U = np.empty((q, e), np.float64)
            for i in range(n):
                row = 0 if in_set[i] else 1
                u = cid[i]
                for j in range(e):
                    z = cin[i] * a0[j] + cout[i] * a1[j] + w_node[row, j]
                    U[u, j] = z if z > 0.0 else 0.0
            P = np.dot(U, w_agg)
            for i in range(n):
                for j in range(e):
                    M2[i, j] = 0.0
            for i in range(n):
                for kk in range(indptr[i], indptr[i + 1]):
                    u = cid[indices[kk]]
                    for j in range(e):
                        M2[i, j] += P[u, j]
            for i in range(n):
                row = 0 if in_set[i] else 1
                for j in range(e):
                    z = M2[i, j] + w_node[row, j]
                    M[i, j] = z if z > 0.0 else 0.0
            full = K - 3
    for _k in range(full):
        for i in range(n):
            for j in range(e):
                M2[i, j] = 0.0
        for i in range(n):
            for kk in range(indptr[i], indptr[i + 1]):
                u = indices[kk]
                for j in range(e):
                    M2[i, j] += M[u, j]
        Z = np.dot(M2, w_agg)
        for i in range(n):
            row = 0 if in_set[i] else 1
            for j in range(e):
                z = Z[i, j] + w_node[row, j]
                M[i, j] = z if z > 0.0 else 0.0
    mu = np.zeros(e, np.float64)
    for i in range(n):
        for j in range(e):
            mu[j] += M[i, j]
    pre = np.dot(mu, w_hid)
    hdim = pre.shape[0]
    hrelu = np.empty(hdim, np.float64)
    for j in range(hdim):
        hrelu[j] = pre[j] if pre[j] > 0.0 else 0.0
    phi = np.dot(hrelu, w_out)
    dists = np.empty(n, np.float64)
    for i in range(n):
        acc = 0.0
        for j in range(e):
            d = M[i, j] - phi[j]
            acc += d * d
        dists[i] = np.sqrt(acc)
    return dists


@jit
def gil_rollout(indptr, indices, costs, obj_code,
                w_node, w_agg, w_hid, w_out, K, sign, profile_out):
    """Greedy policy episode: at each move take the valid vertex maximizing
    sign*distance (sign=-1.0 prefers the nearest embedding; the temperature
    drops out of the argmax). Ties to the lowest index. Returns the terminal
    objective value; the terminal profile lands in profile_out."""
    n = costs.shape[0]
    e = w_agg.shape[0]
    in_set = np.zeros(n, np.bool_)
    blocked = np.zeros(n, np.bool_)
    for i in range(n):
        profile_out[i] = 0
    M = np.empty((n, e), np.float64)
    M2 = np.empty((n, e), np.float64)
    while count_unblocked(blocked) > 0:
        dists = gil_scores(indptr, indices, in_set, w_node, w_agg,
                           w_hid, w_out, K, M, M2)
        best_v = -1
        best = -1.0e300
        for v in range(n):
            if blocked[v]:
                continue
            s = sign * dists[v]
            if s > best:
                best = s
                best_v = v
        in_set[best_v] = True
        mdp_apply(indptr, indices, blocked, profile_out, best_v)
    return profile_objective(indptr, indices, costs, profile_out, obj_code)


# ---------------------------------------------------------------------------
# cross-backend fingerprint (used by tests and the benchmark)
# ---------------------------------------------------------------------------

def fingerprint_workload() -> str:
    """Run a fixed seeded workload through every kernel and render the exact
    results. Both backends must produce identical output."""
    from .rng import Stream, stream_state

    n = 12
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 6), (2, 7),
             (4, 8), (6, 9), (7, 10), (8, 11), (9, 10), (1, 7), (3, 8)]
    indptr = np.zeros(n + 1, np.int64)
    for u, v in edges:
        indptr[u + 1] += 1
        indptr[v + 1] += 1
    indptr = np.cumsum(indptr)
    indices = np.empty(indptr[-1], np.int64)
    fill = indptr[:-1].copy()
    for u, v in sorted(edges):
        indices[fill[u]] = v
        fill[u] += 1
        indices[fill[v]] = u
        fill[v] += 1
    cstream = Stream(2024)
    costs = np.array([cstream.uniform() for _ in range(n)])

    out = []
    st = stream_state(7)
    blocked = np.zeros(n, np.bool_)
    profile = np.zeros(n, np.int8)
    random_complete(indptr, indices, blocked, profile, st)
    out.append("rollout=" + "".join(str(int(x)) for x in profile))
    out.append("sw=" + repr(float(profile_objective(indptr, indices, costs, profile, OBJ_SW_CODE))))
    out.append("fair=" + repr(float(profile_objective(indptr, indices, costs, profile, OBJ_FAIR_CODE))))

    st = stream_state(8)
    prof2 = np.zeros(n, np.int8)
    for i in range(n):
        prof2[i] = 1 if Stream(100 + i).uniform() < 0.5 else 0
    sweeps = br_dynamics(indptr, indices, prof2, np.zeros(n, np.bool_), st, 10 * n)
    out.append("br=" + "".join(str(int(x)) for x in prof2) + f"@{sweeps}")

    st = stream_state(9)
    prof3 = np.zeros(n, np.int8)
    trace = np.zeros(64, np.float64)
    fb, steps = sa_search(indptr, indices, costs, OBJ_FAIR_CODE, 10.0, 30, 200,
                          st, prof3, trace)
    out.append("sa=" + repr(float(fb)) + f"@{int(steps)}")

    st = stream_state(10)
    vis = np.zeros(n, np.int64)
    ret = np.zeros(n, np.float64)
    tot = uct_search(indptr, indices, costs, OBJ_SW_CODE,
                     np.zeros(n, np.bool_), np.zeros(n, np.int8),
                     120, 0.5, False, st, vis, ret)
    out.append("uct=" + ",".join(str(int(x)) for x in vis) + "|" + repr(float(tot)))

    wstream = Stream(77)
    e = 8
    w_node = np.array([[wstream.uniform() - 0.5 for _ in range(e)] for _ in range(2)])
    w_agg = np.array([[(wstream.uniform() - 0.5) * 0.3 for _ in range(e)] for _ in range(e)])
    w_hid = np.array([[(wstream.uniform() - 0.5) * 0.3 for _ in range(e)] for _ in range(e)])
    w_out = np.array([[(wstream.uniform() - 0.5) * 0.3 for _ in range(e)] for _ in range(e)])
    prof4 = np.zeros(n, np.int8)
    gval = gil_rollout(indptr, indices, costs, OBJ_FAIR_CODE,
                       w_node, w_agg, w_hid, w_out, 3, -1.0, prof4)
    out.append("gil=" + "".join(str(int(x)) for x in prof4) + "|" + repr(float(gval)))
    return ";".join(out)
