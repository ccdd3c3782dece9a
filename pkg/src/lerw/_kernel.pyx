# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: recursive crossing expansion and infinite-walk
step streaming.

The pure-Python twin lives in lerw.sampler.  Both engines consume
uniforms through the same block-buffered source in the same documented
order (one per internal expansion node, one per level-up), so identical
seeds give bit-identical trajectories on either engine.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF STACK_CAP = 8192
DEF BLOCK = 8192


cdef class Tables:
    cdef double[:, ::1] shape_cum
    cdef long long[::1] n_shapes
    cdef signed char[:, ::1] shape_ncells
    cdef signed char[:, ::1] shape_fc
    cdef signed char[:, :, ::1] cell_mat
    cdef signed char[:, :, ::1] cell_eu
    cdef signed char[:, :, ::1] cell_ev
    cdef signed char[:, :, ::1] cell_sub
    cdef long long[::1] lev_count
    cdef double[:, ::1] lev_cum
    cdef signed char[:, ::1] lev_type
    cdef signed char[:, ::1] lev_shape
    cdef signed char[:, ::1] gamma0_du
    cdef signed char[:, ::1] gamma0_dv
    cdef signed char[::1] gamma0_len
    cdef signed char[:, ::1] mats
    cdef signed char[:, ::1] compose
    cdef double[::1] alpha_cum

    def __init__(self, shape_cum, n_shapes, shape_ncells, shape_fc,
                 cell_mat, cell_eu, cell_ev, cell_sub,
                 lev_count, lev_cum, lev_type, lev_shape,
                 gamma0_du, gamma0_dv, gamma0_len, mats, compose, alpha_cum):
        self.shape_cum = np.ascontiguousarray(shape_cum, dtype=np.float64)
        self.n_shapes = np.ascontiguousarray(n_shapes, dtype=np.int64)
        self.shape_ncells = np.ascontiguousarray(shape_ncells, dtype=np.int8)
        self.shape_fc = np.ascontiguousarray(shape_fc, dtype=np.int8)
        self.cell_mat = np.ascontiguousarray(cell_mat, dtype=np.int8)
        self.cell_eu = np.ascontiguousarray(cell_eu, dtype=np.int8)
        self.cell_ev = np.ascontiguousarray(cell_ev, dtype=np.int8)
        self.cell_sub = np.ascontiguousarray(cell_sub, dtype=np.int8)
        self.lev_count = np.ascontiguousarray(lev_count, dtype=np.int64)
        self.lev_cum = np.ascontiguousarray(lev_cum, dtype=np.float64)
        self.lev_type = np.ascontiguousarray(lev_type, dtype=np.int8)
        self.lev_shape = np.ascontiguousarray(lev_shape, dtype=np.int8)
        self.gamma0_du = np.ascontiguousarray(gamma0_du, dtype=np.int8)
        self.gamma0_dv = np.ascontiguousarray(gamma0_dv, dtype=np.int8)
        self.gamma0_len = np.ascontiguousarray(gamma0_len, dtype=np.int8)
        self.mats = np.ascontiguousarray(mats, dtype=np.int8)
        self.compose = np.ascontiguousarray(compose, dtype=np.int8)
        self.alpha_cum = np.ascontiguousarray(alpha_cum, dtype=np.float64)


cdef class _Uniforms:
    cdef object gen
    cdef double[::1] buf
    cdef Py_ssize_t i

    def __init__(self, gen):
        self.gen = gen
        self.buf = gen.random(BLOCK)
        self.i = 0

    cdef inline double next(self):
        if self.i >= BLOCK:
            self.buf = self.gen.random(BLOCK)
            self.i = 0
        cdef double x = self.buf[self.i]
        self.i += 1
        return x


cdef class WalkState:
    """Kernel-side infinite-walk state: uniform buffer, pending-cell
    stack, and the emitted trajectory."""
    cdef Tables t
    cdef _Uniforms u
    cdef public int level
    cdef public int ctype
    cdef int s_level[STACK_CAP]
    cdef int s_type[STACK_CAP]
    cdef int s_mat[STACK_CAP]
    cdef long long s_tx[STACK_CAP]
    cdef long long s_ty[STACK_CAP]
    cdef int sp
    cdef cnp.ndarray us_arr
    cdef cnp.ndarray vs_arr
    cdef long long count  # number of stored positions
    cdef list history

    def __init__(self, Tables t, gen):
        self.t = t
        self.u = _Uniforms(gen)
        self.level = -1
        self.ctype = -1
        self.sp = 0
        self.count = 1
        self.us_arr = np.zeros(1024, dtype=np.int64)
        self.vs_arr = np.zeros(1024, dtype=np.int64)
        self.history = []

    @property
    def steps(self):
        return int(self.count - 1)

    @property
    def type_history(self):
        return list(self.history)

    def positions(self, long long n_max=-1):
        cdef long long n = self.count if n_max < 0 else min(n_max + 1, self.count)
        out = np.empty((n, 2), dtype=np.int64)
        out[:, 0] = np.asarray(self.us_arr)[:n]
        out[:, 1] = np.asarray(self.vs_arr)[:n]
        return out

    def position(self, long long n):
        if n >= self.count:
            raise IndexError(f"step {n} beyond expanded prefix ({self.count - 1})")
        return (int(self.us_arr[n]), int(self.vs_arr[n]))

    cdef void _grow(self, long long need):
        cdef long long cap = self.us_arr.shape[0]
        if need <= cap:
            return
        while cap < need:
            cap *= 2
        us = np.zeros(cap, dtype=np.int64)
        vs = np.zeros(cap, dtype=np.int64)
        us[: self.count] = np.asarray(self.us_arr)[: self.count]
        vs[: self.count] = np.asarray(self.vs_arr)[: self.count]
        self.us_arr = us
        self.vs_arr = vs

    def extend(self, long long target_steps):
        cdef Tables t = self.t
        cdef long long[::1] us
        cdef long long[::1] vs
        cdef int k, j, si, ci, i
        cdef double x
        self._grow(target_steps + 4)
        if self.level < 0:
            x = self.u.next()
            k = 0
            while k < 3 and x > t.alpha_cum[k]:
                k += 1
            self.ctype = k
            self.level = 0
            self.history.append(k)
            us = self.us_arr
            vs = self.vs_arr
            for i in range(t.gamma0_len[k]):
                us[self.count] = us[self.count - 1] + t.gamma0_du[k, i]
                vs[self.count] = vs[self.count - 1] + t.gamma0_dv[k, i]
                self.count += 1
        while self.count - 1 < target_steps:
            self._grow(self.count + 3 + 2 * (target_steps - self.count + 1))
            if self.sp == 0:
                self._level_up()
            self._expand(target_steps)
        return self

    cdef void _level_up(self):
        cdef Tables t = self.t
        cdef int i = self.ctype
        cdef double x = self.u.next()
        cdef int n = <int> t.lev_count[i]
        cdef int k = 0
        while k < n - 1 and x > t.lev_cum[i, k]:
            k += 1
        cdef int j = t.lev_type[i, k]
        cdef int si = t.lev_shape[i, k]
        cdef long long half = (<long long> 1) << self.level
        cdef int ci
        for ci in range(t.shape_ncells[j, si] - 1, 0, -1):
            if self.sp >= STACK_CAP:
                raise MemoryError("walk stack overflow")
            self.s_level[self.sp] = self.level
            self.s_type[self.sp] = t.cell_sub[j, si, ci]
            self.s_mat[self.sp] = t.cell_mat[j, si, ci]
            self.s_tx[self.sp] = t.cell_eu[j, si, ci] * half
            self.s_ty[self.sp] = t.cell_ev[j, si, ci] * half
            self.sp += 1
        self.ctype = j
        self.level += 1
        self.history.append(j)

    cdef void _expand(self, long long limit):
        """Pop and expand until the stack empties or the emitted prefix
        covers `limit` steps (limit < 0: drain the stack)."""
        cdef Tables t = self.t
        cdef long long[::1] us = self.us_arr
        cdef long long[::1] vs = self.vs_arr
        cdef int level, ctype, mat, cmat, si, ci, n, k, ma, mb, mc, md
        cdef long long tx, ty, half, eu, ev
        cdef double x
        while self.sp > 0:
            if limit >= 0 and self.count - 1 > limit:
                return
            self.sp -= 1
            level = self.s_level[self.sp]
            ctype = self.s_type[self.sp]
            mat = self.s_mat[self.sp]
            tx = self.s_tx[self.sp]
            ty = self.s_ty[self.sp]
            ma = t.mats[mat, 0]
            mb = t.mats[mat, 1]
            mc = t.mats[mat, 2]
            md = t.mats[mat, 3]
            if level == 0:
                if self.count + 2 > us.shape[0]:
                    self._grow(self.count + 2)
                    us = self.us_arr
                    vs = self.vs_arr
                for k in range(t.gamma0_len[ctype]):
                    tx = tx + ma * t.gamma0_du[ctype, k] + mb * t.gamma0_dv[ctype, k]
                    ty = ty + mc * t.gamma0_du[ctype, k] + md * t.gamma0_dv[ctype, k]
                    us[self.count] = tx
                    vs[self.count] = ty
                    self.count += 1
                continue
            x = self.u.next()
            n = <int> t.n_shapes[ctype]
            si = 0
            while si < n - 1 and x > t.shape_cum[ctype, si]:
                si += 1
            half = (<long long> 1) << (level - 1)
            if self.sp + 3 > STACK_CAP:
                raise MemoryError("walk stack overflow")
            for ci in range(t.shape_ncells[ctype, si] - 1, -1, -1):
                eu = t.cell_eu[ctype, si, ci] * half
                ev = t.cell_ev[ctype, si, ci] * half
                self.s_level[self.sp] = level - 1
                self.s_type[self.sp] = t.cell_sub[ctype, si, ci]
                self.s_mat[self.sp] = t.compose[mat, t.cell_mat[ctype, si, ci]]
                self.s_tx[self.sp] = tx + ma * eu + mb * ev
                self.s_ty[self.sp] = ty + mc * eu + md * ev
                self.sp += 1


def run_walk(Tables t, gen, long long n_steps):
    """One-shot infinite-walk trajectory of n_steps steps."""
    cdef WalkState st = WalkState(t, gen)
    st.extend(n_steps)
    pos = st.positions(n_steps)
    return np.ascontiguousarray(pos[:, 0]), np.ascontiguousarray(pos[:, 1])


def sample_crossing(Tables t, gen, int level, int ctype):
    """One crossing of the level-`level` triangle of the given type."""
    cdef WalkState st = WalkState(t, gen)
    st.level = level  # suppress the alpha draw; expand one explicit node
    st.ctype = ctype
    st.s_level[0] = level
    st.s_type[0] = ctype
    st.s_mat[0] = 0
    st.s_tx[0] = 0
    st.s_ty[0] = 0
    st.sp = 1
    while st.sp > 0:
        st._grow(st.count + 2 * st.sp + 4096)
        st._expand(-1)
    pos = st.positions()
    return np.ascontiguousarray(pos[:, 0]), np.ascontiguousarray(pos[:, 1])
