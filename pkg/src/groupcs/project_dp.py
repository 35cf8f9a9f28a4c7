"""Exact group-model projection by dynamic programming over a nice tree
decomposition of the incidence graph.

Each bag vertex is coloured 0, 1, or 1? ("promised"):

* a group coloured 1 is selected; groups are never coloured 1?;
* an element coloured 1 is counted and already covered by a selected
  bag group; 1? means counted now, covered by a group selected later.

A colouring is consistent when every bag element of a selected bag
group is coloured 1.  Tables map (colouring, group count[, element
count]) to the best achievable counted weight; element weight is added
once, at the introduce step that first colours the element non-zero,
and join nodes subtract the weight of non-zero bag elements counted in
both branches.  Walking the argmax back down the tree recovers the
selected groups (and, with the element budget active, the chosen
support).

Two engines share these rules: a dictionary-based reference engine that
also handles the element-budget extension, and a flattened engine
compiled with numba for the plain case, which recovery loops hit once
per iteration.
"""

import functools
import itertools
import logging
import math

import numpy as np

from .graphs import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    NiceTreeDecomposition,
    build_incidence_graph,
    compute_decomposition,
    to_nice,
    validate_decomposition,
)
from .model import GroupModel, _weight_values, make_projection_result

__all__ = ["dp_project", "projection_decomposition", "WidthGuardError", "is_consistent"]

log = logging.getLogger(__name__)

MAX_WIDTH = 14

try:  # the compiled engine is optional; the reference engine always works
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


class WidthGuardError(ValueError):
    """Decomposition too wide for the table-based projector."""


def is_consistent(labels, group_positions, member_positions) -> bool:
    """Consistency of a bag colouring.

    ``labels[p]`` is the colour at bag position p, ``group_positions``
    lists the group slots, and ``member_positions[p]`` the element slots
    covered by the group at slot p.  Every element adjacent to a
    1-coloured group must itself be coloured 1.
    """
    for p in group_positions:
        if labels[p] == 1:
            for q in member_positions[p]:
                if labels[q] != 1:
                    return False
    return True


@functools.lru_cache(maxsize=64)
def projection_decomposition(model: GroupModel) -> NiceTreeDecomposition:
    """Nice decomposition of the model's incidence graph (cached per model)."""
    inc = build_incidence_graph(model)
    td = compute_decomposition(inc)
    return to_nice(td)


# ---------------------------------------------------------------------------
# shared per-node metadata


class _NodeInfo:
    """Sorted bag plus bag-local incidence, precomputed once per node."""

    def __init__(self, ntd, node, n_elements, groups):
        self.kind = ntd.kinds[node]
        self.bag = tuple(sorted(ntd.bags[node]))
        self.pos = {v: p for p, v in enumerate(self.bag)}
        self.vertex = ntd.vertex[node]
        self.group_pos = tuple(p for p, v in enumerate(self.bag) if v >= n_elements)
        self.elem_pos = tuple(p for p, v in enumerate(self.bag) if v < n_elements)
        # element slots belonging to the group at each slot
        self.members = {
            p: tuple(
                q for q in self.elem_pos if self.bag[q] in groups[self.bag[p] - n_elements]
            )
            for p in self.group_pos
        }


def _node_infos(ntd, model):
    n = model.ground_size
    return [_NodeInfo(ntd, x, n, model.groups) for x in range(ntd.num_nodes)]


# ---------------------------------------------------------------------------
# reference engine (dict tables, plain and element-budget modes)


def _dict_dp(model, w, ntd, k_mode):
    n = model.ground_size
    g_max, k_max = model.budget_g, (model.sparsity_k if k_mode else 0)
    infos = _node_infos(ntd, model)
    order = ntd.postorder()
    tables: dict[int, dict] = {}
    back: dict[int, dict] = {}

    def counters(i, j):
        return (i, j) if k_mode else (i,)

    for x in order:
        info = infos[x]
        kids = ntd.children[x]
        table: dict[tuple, dict[tuple, float]] = {}
        bp: dict[tuple, tuple] = {}

        def put(col, cnt, val, ptr):
            ent = table.setdefault(col, {})
            if val > ent.get(cnt, -math.inf):
                ent[cnt] = val
                bp[(col, cnt)] = ptr

        if info.kind == LEAF and not kids:
            put((), counters(0, 0), 0.0, None)
        elif info.kind == LEAF:  # empty-bag root on top of the final forget
            for col, ent in tables[kids[0]].items():
                for cnt, val in ent.items():
                    put(col, cnt, val, ("c", col, cnt))
        elif info.kind == INTRODUCE:
            (y,) = kids
            v = info.vertex
            pv = info.pos[v]
            if v < n:  # element
                cover = tuple(
                    p for p in info.group_pos if pv in infos[x].members[p]
                )
                for col, ent in tables[y].items():
                    base = col[:pv] + (None,) + col[pv:]
                    covered = any(base[p] == 1 for p in cover)
                    for cnt, val in ent.items():
                        i = cnt[0]
                        j = cnt[1] if k_mode else 0
                        if k_mode or not covered:
                            put(base[:pv] + (0,) + base[pv + 1 :], cnt, val, ("ie", col, cnt, 0))
                        if covered and (not k_mode or j + 1 <= k_max):
                            put(
                                base[:pv] + (1,) + base[pv + 1 :],
                                counters(i, j + 1),
                                val + w[v],
                                ("ie", col, cnt, 1),
                            )
                        if not k_mode or j + 1 <= k_max:
                            put(
                                base[:pv] + (2,) + base[pv + 1 :],
                                counters(i, j + 1),
                                val + w[v],
                                ("ie", col, cnt, 2),
                            )
            else:  # group
                grp = model.groups[v - n]
                child_bag = infos[y].bag
                member_child_pos = tuple(
                    q for q, u in enumerate(child_bag) if u < n and u in grp
                )
                for col, ent in tables[y].items():
                    # label 0: carry over unchanged
                    for cnt, val in ent.items():
                        put(col[:pv] + (0,) + col[pv:], cnt, val, ("ig0", col, cnt))
                    # label 1: select the group, discharging promised members
                    lab = list(col)
                    ok = True
                    for q in member_child_pos:
                        if lab[q] == 0:
                            if not k_mode:
                                ok = False
                                break
                        elif lab[q] == 2:
                            lab[q] = 1
                    if not ok:
                        continue
                    parent = tuple(lab[:pv]) + (1,) + tuple(lab[pv:])
                    for cnt, val in ent.items():
                        i = cnt[0]
                        if i + 1 > g_max:
                            continue
                        j = cnt[1] if k_mode else 0
                        put(parent, counters(i + 1, j), val, ("ig1", col, cnt))
        elif info.kind == FORGET:
            (y,) = kids
            v = info.vertex
            qv = infos[y].pos[v]
            for col, ent in tables[y].items():
                if col[qv] == 2:
                    continue  # promises cannot be forgotten
                parent = col[:qv] + col[qv + 1 :]
                for cnt, val in ent.items():
                    put(parent, cnt, val, ("c", col, cnt))
        elif info.kind == JOIN:
            y, z = kids
            elem_set = set(info.elem_pos)
            for cy, ent_y in tables[y].items():
                for cz, ent_z in tables[z].items():
                    parent = []
                    gshift = 0
                    nonzero_elems = []
                    ok = True
                    for p, (a, b) in enumerate(zip(cy, cz)):
                        if p in elem_set:
                            if (a == 0) != (b == 0):
                                ok = False
                                break
                            lab = 0 if a == 0 else (2 if a == 2 and b == 2 else 1)
                            parent.append(lab)
                            if lab:
                                nonzero_elems.append(info.bag[p])
                        else:
                            if a != b:
                                ok = False
                                break
                            parent.append(a)
                            gshift += a == 1
                    if not ok:
                        continue
                    parent = tuple(parent)
                    corr = float(sum(w[e] for e in nonzero_elems))
                    eshift = len(nonzero_elems)
                    for (cnt_y, val_y), (cnt_z, val_z) in itertools.product(
                        ent_y.items(), ent_z.items()
                    ):
                        i = cnt_y[0] + cnt_z[0] - gshift
                        if not 0 <= i <= g_max:
                            continue
                        if k_mode:
                            j = cnt_y[1] + cnt_z[1] - eshift
                            if not 0 <= j <= k_max:
                                continue
                        else:
                            j = 0
                        put(
                            parent,
                            counters(i, j),
                            val_y + val_z - corr,
                            ("j", cy, cnt_y, cz, cnt_z),
                        )
        else:  # pragma: no cover
            raise AssertionError(info.kind)
        tables[x] = table
        back[x] = bp
        if log.isEnabledFor(logging.DEBUG):
            log.debug(
                "dp node %d kind=%s bag=%d colourings=%d entries=%d",
                x, info.kind, len(info.bag), len(table),
                sum(len(e) for e in table.values()),
            )

    root_entries = tables[ntd.root].get((), {})
    if not root_entries:
        raise RuntimeError("dp produced no feasible root entry")
    best_cnt = max(root_entries, key=lambda c: (root_entries[c], [-x for x in c]))
    best_val = root_entries[best_cnt]

    selected: set[int] = set()
    chosen: set[int] = set()
    stack = [(ntd.root, (), best_cnt)]
    while stack:
        x, col, cnt = stack.pop()
        ptr = back[x].get((col, cnt))
        if ptr is None:
            continue
        kids = ntd.children[x]
        tag = ptr[0]
        if tag == "c" or tag == "ig0":
            stack.append((kids[0], ptr[1], ptr[2]))
        elif tag == "ie":
            if ptr[3] != 0:
                chosen.add(infos[x].vertex)
            stack.append((kids[0], ptr[1], ptr[2]))
        elif tag == "ig1":
            selected.add(infos[x].vertex - n)
            stack.append((kids[0], ptr[1], ptr[2]))
        elif tag == "j":
            stack.append((kids[0], ptr[1], ptr[2]))
            stack.append((kids[1], ptr[3], ptr[4]))
    return best_val, sorted(selected), sorted(chosen)


# ---------------------------------------------------------------------------
# compiled engine (plain mode): per-node transitions flattened to arrays


K_LEAF, K_IE, K_IG, K_FORGET, K_JOIN, K_PASS = 0, 1, 2, 3, 4, 5


class _Compiled:
    pass


def _enumerate_codes(info):
    """Consistent colourings of a bag, as label tuples."""
    options = [
        (0, 1) if p in info.group_pos else (0, 1, 2) for p in range(len(info.bag))
    ]
    out = []
    for labels in itertools.product(*options):
        if is_consistent(labels, info.group_pos, info.members):
            out.append(labels)
    return out


def _compile_plain(model: GroupModel, ntd: NiceTreeDecomposition) -> _Compiled:
    n = model.ground_size
    infos = _node_infos(ntd, model)
    order = ntd.postorder()
    codes = {}
    index = {}
    for x in order:
        codes[x] = _enumerate_codes(infos[x])
        index[x] = {c: k for k, c in enumerate(codes[x])}

    nn = ntd.num_nodes
    kind = np.full(nn, -1, np.int32)
    child1 = np.full(nn, -1, np.int32)
    child2 = np.full(nn, -1, np.int32)
    ncodes = np.zeros(nn, np.int64)
    wvert = np.full(nn, -1, np.int32)  # element id (intro-elem) or group id (intro-group)
    ie_src, ie_addw = [], []
    ie_beg = np.zeros(nn, np.int64)
    ig0_src = []
    ig0_beg = np.zeros(nn, np.int64)
    ig1_cc, ig1_cp = [], []
    ig1_beg = np.zeros(nn, np.int64)
    ig1_end = np.zeros(nn, np.int64)
    f_src0, f_src1 = [], []
    f_beg = np.zeros(nn, np.int64)
    jn_y, jn_z, jn_p, jn_gs = [], [], [], []
    jn_beg = np.zeros(nn, np.int64)
    jn_end = np.zeros(nn, np.int64)
    jn_corr_ptr, jn_corr_elem = [0], []

    for x in order:
        ie_beg[x] = len(ie_src)
        ig0_beg[x] = len(ig0_src)
        ig1_beg[x] = len(ig1_cc)
        f_beg[x] = len(f_src0)
        jn_beg[x] = len(jn_y)
        info = infos[x]
        kids = ntd.children[x]
        ncodes[x] = len(codes[x])
        if kids:
            child1[x] = kids[0]
        if len(kids) > 1:
            child2[x] = kids[1]
        if info.kind == LEAF:
            kind[x] = K_LEAF if not kids else K_PASS
        elif info.kind == INTRODUCE and info.vertex < n:
            kind[x] = K_IE
            wvert[x] = info.vertex
            v, pv = info.vertex, info.pos[info.vertex]
            cover = tuple(p for p in info.group_pos if pv in info.members[p])
            cidx = index[kids[0]]
            for labels in codes[x]:
                child = labels[:pv] + labels[pv + 1 :]
                src = cidx.get(child, -1)
                lab = labels[pv]
                if src >= 0 and lab == 1 and not any(labels[p] == 1 for p in cover):
                    src = -1
                ie_src.append(src)
                ie_addw.append(0 if lab == 0 else 1)
        elif info.kind == INTRODUCE:
            kind[x] = K_IG
            wvert[x] = info.vertex - n
            v, pv = info.vertex, info.pos[info.vertex]
            grp = model.groups[v - n]
            cidx = index[kids[0]]
            child_bag = infos[kids[0]].bag
            member_child = tuple(
                q for q, u in enumerate(child_bag) if u < n and u in grp
            )
            for labels in codes[x]:
                if labels[pv] == 1:
                    ig0_src.append(-1)
                    continue
                child = labels[:pv] + labels[pv + 1 :]
                ig0_src.append(cidx.get(child, -1))
            for cc_k, child in enumerate(codes[kids[0]]):
                lab = list(child)
                ok = True
                for q in member_child:
                    if lab[q] == 0:
                        ok = False
                        break
                    if lab[q] == 2:
                        lab[q] = 1
                if not ok:
                    continue
                parent = tuple(lab[:pv]) + (1,) + tuple(lab[pv:])
                cp_k = index[x].get(parent, -1)
                if cp_k >= 0:
                    ig1_cc.append(cc_k)
                    ig1_cp.append(cp_k)
        elif info.kind == FORGET:
            kind[x] = K_FORGET
            qv = infos[kids[0]].pos[info.vertex]
            cidx = index[kids[0]]
            for labels in codes[x]:
                f_src0.append(cidx.get(labels[:qv] + (0,) + labels[qv:], -1))
                f_src1.append(cidx.get(labels[:qv] + (1,) + labels[qv:], -1))
        elif info.kind == JOIN:
            kind[x] = K_JOIN
            idx_y, idx_z, idx_p = index[kids[0]], index[kids[1]], index[x]
            elem_set = set(info.elem_pos)
            pairs = [
                ((0, 0, 0), (1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 2, 2))
                if p in elem_set
                else ((0, 0, 0), (1, 1, 1))
                for p in range(len(info.bag))
            ]
            for combo in itertools.product(*pairs):
                cp = tuple(t[0] for t in combo)
                cy = tuple(t[1] for t in combo)
                cz = tuple(t[2] for t in combo)
                ky, kz, kp = idx_y.get(cy, -1), idx_z.get(cz, -1), idx_p.get(cp, -1)
                if ky < 0 or kz < 0 or kp < 0:
                    continue
                jn_y.append(ky)
                jn_z.append(kz)
                jn_p.append(kp)
                jn_gs.append(sum(1 for p in info.group_pos if cp[p] == 1))
                jn_corr_elem.extend(info.bag[p] for p in sorted(elem_set) if cp[p] != 0)
                jn_corr_ptr.append(len(jn_corr_elem))
        ig1_end[x] = len(ig1_cc)
        jn_end[x] = len(jn_y)

    tbl_off = np.zeros(nn + 1, np.int64)
    stride = model.budget_g + 1
    for x in range(nn):
        tbl_off[x + 1] = tbl_off[x] + ncodes[x] * stride
    if log.isEnabledFor(logging.DEBUG):
        log.debug(
            "compiled dp: %d nodes, %d table entries, width %d",
            nn, int(tbl_off[-1]), ntd.width,
        )

    c = _Compiled()
    c.model = model
    c.ntd = ntd
    c.order = np.array(order, np.int32)
    c.kind, c.child1, c.child2 = kind, child1, child2
    c.ncodes, c.wvert, c.tbl_off, c.stride = ncodes, wvert, tbl_off, stride
    c.ie_src = np.array(ie_src, np.int64)
    c.ie_addw = np.array(ie_addw, np.int8)
    c.ie_beg = ie_beg
    c.ig0_src = np.array(ig0_src, np.int64)
    c.ig0_beg = ig0_beg
    c.ig1_cc = np.array(ig1_cc, np.int64)
    c.ig1_cp = np.array(ig1_cp, np.int64)
    c.ig1_beg = ig1_beg
    c.ig1_end = ig1_end
    c.f_src0 = np.array(f_src0, np.int64)
    c.f_src1 = np.array(f_src1, np.int64)
    c.f_beg = f_beg
    c.jn_y = np.array(jn_y, np.int64)
    c.jn_z = np.array(jn_z, np.int64)
    c.jn_p = np.array(jn_p, np.int64)
    c.jn_gs = np.array(jn_gs, np.int64)
    c.jn_beg = jn_beg
    c.jn_end = jn_end
    c.jn_corr_ptr = np.array(jn_corr_ptr, np.int64)
    c.jn_corr_elem = np.array(jn_corr_elem, np.int64)
    c.total = int(tbl_off[-1])
    return c


@njit(cache=True)
def _forward(
    order, kind, child1, child2, ncodes, wvert, tbl_off, stride,
    ie_src, ie_addw, ie_beg, ig0_src, ig0_beg, ig1_cc, ig1_cp, ig1_beg, ig1_end,
    f_src0, f_src1, f_beg, jn_y, jn_z, jn_p, jn_gs, jn_beg, jn_end,
    jn_corr_ptr, jn_corr_elem, w, buf,
):
    g_max = stride - 1
    buf[:] = -np.inf
    for oi in range(order.shape[0]):
        x = order[oi]
        off = tbl_off[x]
        k = kind[x]
        if k == K_LEAF:
            buf[off] = 0.0
        elif k == K_PASS:
            coff = tbl_off[child1[x]]
            for t in range(stride):
                buf[off + t] = buf[coff + t]
        elif k == K_IE:
            coff = tbl_off[child1[x]]
            base = ie_beg[x]
            wv = w[wvert[x]]
            for code in range(ncodes[x]):
                src = ie_src[base + code]
                if src < 0:
                    continue
                add = wv if ie_addw[base + code] == 1 else 0.0
                for i in range(stride):
                    buf[off + code * stride + i] = buf[coff + src * stride + i] + add
        elif k == K_IG:
            coff = tbl_off[child1[x]]
            base = ig0_beg[x]
            for code in range(ncodes[x]):
                src = ig0_src[base + code]
                if src < 0:
                    continue
                for i in range(stride):
                    buf[off + code * stride + i] = buf[coff + src * stride + i]
            for t in range(ig1_beg[x], ig1_end[x]):
                cc, cp = ig1_cc[t], ig1_cp[t]
                for i in range(1, stride):
                    cand = buf[coff + cc * stride + i - 1]
                    if cand > buf[off + cp * stride + i]:
                        buf[off + cp * stride + i] = cand
        elif k == K_FORGET:
            coff = tbl_off[child1[x]]
            base = f_beg[x]
            for code in range(ncodes[x]):
                s0, s1 = f_src0[base + code], f_src1[base + code]
                for i in range(stride):
                    best = -np.inf
                    if s0 >= 0:
                        best = buf[coff + s0 * stride + i]
                    if s1 >= 0:
                        cand = buf[coff + s1 * stride + i]
                        if cand > best:
                            best = cand
                    buf[off + code * stride + i] = best
        else:  # join
            yoff, zoff = tbl_off[child1[x]], tbl_off[child2[x]]
            for t in range(jn_beg[x], jn_end[x]):
                corr = 0.0
                for e in range(jn_corr_ptr[t], jn_corr_ptr[t + 1]):
                    corr += w[jn_corr_elem[e]]
                ky, kz, kp, gs = jn_y[t], jn_z[t], jn_p[t], jn_gs[t]
                for i1 in range(stride):
                    vy = buf[yoff + ky * stride + i1]
                    if vy == -np.inf:
                        continue
                    for i2 in range(stride):
                        i = i1 + i2 - gs
                        if i < 0 or i > g_max:
                            continue
                        vz = buf[zoff + kz * stride + i2]
                        if vz == -np.inf:
                            continue
                        cand = vy + vz - corr
                        if cand > buf[off + kp * stride + i]:
                            buf[off + kp * stride + i] = cand
    root = order[order.shape[0] - 1]
    roff = tbl_off[root]
    best, arg = buf[roff], 0
    for i in range(1, stride):
        if buf[roff + i] > best:
            best, arg = buf[roff + i], i
    return best, arg


@njit(cache=True)
def _backward(
    root_i, order, kind, child1, child2, ncodes, wvert, tbl_off, stride,
    ie_src, ie_addw, ie_beg, ig0_src, ig0_beg, ig1_cc, ig1_cp, ig1_beg, ig1_end,
    f_src0, f_src1, f_beg, jn_y, jn_z, jn_p, jn_gs, jn_beg, jn_end,
    jn_corr_ptr, jn_corr_elem, w, buf, selected,
):
    root = order[order.shape[0] - 1]
    stack_node = np.empty(order.shape[0] + 1, np.int64)
    stack_code = np.empty(order.shape[0] + 1, np.int64)
    stack_i = np.empty(order.shape[0] + 1, np.int64)
    top = 0
    stack_node[0], stack_code[0], stack_i[0] = root, 0, root_i
    while top >= 0:
        x, code, i = stack_node[top], stack_code[top], stack_i[top]
        top -= 1
        val = buf[tbl_off[x] + code * stride + i]
        k = kind[x]
        if k == K_LEAF:
            continue
        if k == K_PASS:
            top += 1
            stack_node[top], stack_code[top], stack_i[top] = child1[x], code, i
            continue
        if k == K_IE:
            src = ie_src[ie_beg[x] + code]
            top += 1
            stack_node[top], stack_code[top], stack_i[top] = child1[x], src, i
            continue
        if k == K_IG:
            coff = tbl_off[child1[x]]
            s0 = ig0_src[ig0_beg[x] + code]
            if s0 >= 0 and buf[coff + s0 * stride + i] == val:
                top += 1
                stack_node[top], stack_code[top], stack_i[top] = child1[x], s0, i
                continue
            found = False
            for t in range(ig1_beg[x], ig1_end[x]):
                if ig1_cp[t] == code and i >= 1 and buf[coff + ig1_cc[t] * stride + i - 1] == val:
                    selected[wvert[x]] = 1
                    top += 1
                    stack_node[top], stack_code[top], stack_i[top] = (
                        child1[x], ig1_cc[t], i - 1,
                    )
                    found = True
                    break
            if not found:
                return -1  # no producing transition matched: inconsistency
            continue
        if k == K_FORGET:
            coff = tbl_off[child1[x]]
            s0 = f_src0[f_beg[x] + code]
            s1 = f_src1[f_beg[x] + code]
            if s0 >= 0 and buf[coff + s0 * stride + i] == val:
                top += 1
                stack_node[top], stack_code[top], stack_i[top] = child1[x], s0, i
            elif s1 >= 0 and buf[coff + s1 * stride + i] == val:
                top += 1
                stack_node[top], stack_code[top], stack_i[top] = child1[x], s1, i
            else:
                return -1
            continue
        # join
        yoff, zoff = tbl_off[child1[x]], tbl_off[child2[x]]
        found = False
        for t in range(jn_beg[x], jn_end[x]):
            if jn_p[t] != code:
                continue
            corr = 0.0
            for e in range(jn_corr_ptr[t], jn_corr_ptr[t + 1]):
                corr += w[jn_corr_elem[e]]
            gs = jn_gs[t]
            for i1 in range(stride):
                i2 = i + gs - i1
                if i2 < 0 or i2 >= stride:
                    continue
                vy = buf[yoff + jn_y[t] * stride + i1]
                vz = buf[zoff + jn_z[t] * stride + i2]
                if vy == -np.inf or vz == -np.inf:
                    continue
                if vy + vz - corr == val:
                    top += 1
                    stack_node[top], stack_code[top], stack_i[top] = (
                        child1[x], jn_y[t], i1,
                    )
                    top += 1
                    stack_node[top], stack_code[top], stack_i[top] = (
                        child2[x], jn_z[t], i2,
                    )
                    found = True
                    break
            if found:
                break
        if not found:
            return -1
    return 0


def _compiled_args(c):
    return (
        c.order, c.kind, c.child1, c.child2, c.ncodes, c.wvert, c.tbl_off,
        c.stride, c.ie_src, c.ie_addw, c.ie_beg, c.ig0_src, c.ig0_beg,
        c.ig1_cc, c.ig1_cp, c.ig1_beg, c.ig1_end, c.f_src0, c.f_src1, c.f_beg,
        c.jn_y, c.jn_z, c.jn_p, c.jn_gs, c.jn_beg, c.jn_end, c.jn_corr_ptr,
        c.jn_corr_elem,
    )


def _compiled_dp(c: _Compiled, w):
    buf = np.empty(c.total)
    best, arg = _forward(*_compiled_args(c), w, buf)
    selected = np.zeros(c.model.num_groups, np.int8)
    status = _backward(arg, *_compiled_args(c), w, buf, selected)
    if status != 0:  # pragma: no cover - defensive
        raise RuntimeError("dp reconstruction failed to match a transition")
    return float(best), np.flatnonzero(selected).tolist()


@functools.lru_cache(maxsize=64)
def _compiled_for(model: GroupModel) -> _Compiled:
    return _compile_plain(model, projection_decomposition(model))


# ---------------------------------------------------------------------------


def dp_project(
    model: GroupModel,
    w,
    ntd: NiceTreeDecomposition | None = None,
    k_extension: bool | None = None,
    signal: np.ndarray | None = None,
    engine: str = "auto",
):
    """Project weights onto the group model via the treewidth DP.

    ``ntd`` defaults to a cached decomposition of the model's incidence
    graph.  ``k_extension`` turns the element-budget counter on; by
    default it follows the model.  ``engine`` may be "auto", "compiled"
    or "reference".  Widths above 14 are refused: use the
    cutting-plane projector for such models.
    """
    wv = _weight_values(w)
    if len(wv) != model.ground_size:
        raise ValueError("weight vector length does not match the model")
    if k_extension is None:
        k_extension = model.k_active
    k_mode = bool(k_extension) and model.k_active

    custom = ntd is not None
    if custom:
        if ntd.width > MAX_WIDTH:
            raise WidthGuardError(
                f"width {ntd.width} > {MAX_WIDTH}: use benders_project for wide models"
            )
        report = validate_decomposition(
            ntd.as_tree_decomposition(), build_incidence_graph(model)
        )
        if not report:
            raise ValueError(f"invalid decomposition: {report.message}")
    else:
        ntd = projection_decomposition(model)
        if ntd.width > MAX_WIDTH:
            raise WidthGuardError(
                f"width {ntd.width} > {MAX_WIDTH}: use benders_project for wide models"
            )

    use_compiled = (
        engine in ("auto", "compiled") and HAVE_NUMBA and not k_mode
    )
    if engine == "compiled" and k_mode:
        raise ValueError("compiled engine does not support the element budget")

    if use_compiled:
        c = _compile_plain(model, ntd) if custom else _compiled_for(model)
        value, selected = _compiled_dp(c, wv)
        chosen = None
    else:
        value, selected, chosen = _dict_dp(model, wv, ntd, k_mode)

    if k_mode:
        support = chosen
    else:
        support = sorted(set().union(*(model.groups[j] for j in selected)) if selected else set())
    result = make_projection_result(
        model, wv, selected, support, signal=signal, k_constrained=k_mode
    )
    if not math.isclose(result.covered_weight, value, rel_tol=1e-9, abs_tol=1e-9):
        raise RuntimeError(
            f"dp value {value} disagrees with reconstructed support weight "
            f"{result.covered_weight}"
        )
    return result
