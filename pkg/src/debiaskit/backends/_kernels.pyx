# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled training kernels.

Same contract as ``backends.python``: float64 C-contiguous arrays in,
fresh arrays out. Matrix products go through BLAS dgemm; the bias add,
relu, masking and Adam arithmetic are fused loops to avoid the
temporaries the NumPy path allocates.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow as cpow
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

NAME = "cython"


cdef void _mm(double* a, double* b, double* c,
              int m, int n, int k, bint ta, bint tb) noexcept nogil:
    # Row-major C(m,n) = op(A) @ op(B) with op(A) (m,k) and op(B) (k,n).
    # dgemm is column-major, so compute C^T = op(B)^T @ op(A)^T by
    # swapping the operands and keeping the transpose flags.
    cdef double one = 1.0, zero = 0.0
    cdef char cta = b'T' if ta else b'N'
    cdef char ctb = b'T' if tb else b'N'
    cdef int lda = m if ta else k   # stored A: (k,m) if ta else (m,k)
    cdef int ldb = k if tb else n   # stored B: (n,k) if tb else (k,n)
    dgemm(&ctb, &cta, &n, &m, &k, &one, b, &ldb, a, &lda, &zero, c, &n)


def mlp_forward(cnp.ndarray[double, ndim=2] W1 not None,
                cnp.ndarray[double, ndim=1] b1 not None,
                cnp.ndarray[double, ndim=2] W2 not None,
                cnp.ndarray[double, ndim=1] b2 not None,
                cnp.ndarray[double, ndim=2] W3 not None,
                cnp.ndarray[double, ndim=1] b3 not None,
                cnp.ndarray[double, ndim=2] X not None):
    cdef int n = X.shape[0], d = X.shape[1]
    cdef int h1 = W1.shape[1], h2 = W2.shape[1]
    cdef cnp.ndarray[double, ndim=2] H1 = np.empty((n, h1), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] H2 = np.empty((n, h2), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] z = np.empty(n, dtype=np.float64)
    cdef double* ph1 = <double*> H1.data
    cdef double* ph2 = <double*> H2.data
    cdef double* pb1 = <double*> b1.data
    cdef double* pb2 = <double*> b2.data
    cdef double* pw3 = <double*> W3.data
    cdef double* pz = <double*> z.data
    cdef double acc, bias3 = b3[0]
    cdef int i, j
    with nogil:
        _mm(<double*> X.data, <double*> W1.data, ph1, n, h1, d, False, False)
        for i in range(n):
            for j in range(h1):
                acc = ph1[i * h1 + j] + pb1[j]
                ph1[i * h1 + j] = acc if acc > 0.0 else 0.0
        _mm(ph1, <double*> W2.data, ph2, n, h2, h1, False, False)
        for i in range(n):
            for j in range(h2):
                acc = ph2[i * h2 + j] + pb2[j]
                ph2[i * h2 + j] = acc if acc > 0.0 else 0.0
        for i in range(n):
            acc = bias3
            for j in range(h2):
                acc += ph2[i * h2 + j] * pw3[j]
            pz[i] = acc
    return H1, H2, z


def mlp_backward(cnp.ndarray[double, ndim=2] W2 not None,
                 cnp.ndarray[double, ndim=2] W3 not None,
                 cnp.ndarray[double, ndim=2] X not None,
                 cnp.ndarray[double, ndim=2] H1 not None,
                 cnp.ndarray[double, ndim=2] H2 not None,
                 cnp.ndarray[double, ndim=1] dz not None):
    cdef int n = X.shape[0], d = X.shape[1]
    cdef int h1 = W2.shape[0], h2 = W2.shape[1]
    cdef cnp.ndarray[double, ndim=2] gW1 = np.empty((d, h1), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gb1 = np.zeros(h1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] gW2 = np.empty((h1, h2), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gb2 = np.zeros(h2, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] gW3 = np.zeros((h2, 1), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gb3 = np.zeros(1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] dA2 = np.empty((n, h2), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] dA1 = np.empty((n, h1), dtype=np.float64)
    cdef double* ph1 = <double*> H1.data
    cdef double* ph2 = <double*> H2.data
    cdef double* pw3 = <double*> W3.data
    cdef double* pdz = <double*> dz.data
    cdef double* pda2 = <double*> dA2.data
    cdef double* pda1 = <double*> dA1.data
    cdef double* pgw3 = <double*> gW3.data
    cdef double* pgb3 = <double*> gb3.data
    cdef double* pgb2 = <double*> gb2.data
    cdef double* pgb1 = <double*> gb1.data
    cdef double dzi
    cdef int i, j
    with nogil:
        # branchless relu masks keep these loops SIMD-friendly
        for i in range(n):
            dzi = pdz[i]
            pgb3[0] += dzi
            for j in range(h2):
                pgw3[j] += ph2[i * h2 + j] * dzi
                pda2[i * h2 + j] = dzi * pw3[j] * (ph2[i * h2 + j] > 0.0)
                pgb2[j] += pda2[i * h2 + j]
        _mm(ph1, pda2, <double*> gW2.data, h1, h2, n, True, False)
        _mm(pda2, <double*> W2.data, pda1, n, h1, h2, False, True)
        for i in range(n):
            for j in range(h1):
                pda1[i * h1 + j] *= ph1[i * h1 + j] > 0.0
                pgb1[j] += pda1[i * h1 + j]
        _mm(<double*> X.data, pda1, <double*> gW1.data, d, h1, n, True, False)
    return gW1, gb1, gW2, gb2, gW3, gb3


def adam_update(object p, object g, object m, object v,
                long t, double lr, double beta1, double beta2, double eps):
    cdef cnp.ndarray pa = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray ga = np.ascontiguousarray(g, dtype=np.float64)
    cdef cnp.ndarray p_new = np.empty_like(pa)
    cdef cnp.ndarray m_new = np.empty_like(pa)
    cdef cnp.ndarray v_new = np.empty_like(pa)
    cdef double[::1] pf = pa.ravel()
    cdef double[::1] gf = ga.ravel()
    cdef double[::1] mf = np.ascontiguousarray(m, dtype=np.float64).ravel()
    cdef double[::1] vf = np.ascontiguousarray(v, dtype=np.float64).ravel()
    cdef double[::1] po = p_new.ravel()
    cdef double[::1] mo = m_new.ravel()
    cdef double[::1] vo = v_new.ravel()
    cdef double bc1 = 1.0 - cpow(beta1, <double> t)
    cdef double bc2 = 1.0 - cpow(beta2, <double> t)
    cdef double mi, vi
    cdef Py_ssize_t i, size = pf.shape[0]
    with nogil:
        for i in range(size):
            mi = beta1 * mf[i] + (1.0 - beta1) * gf[i]
            vi = beta2 * vf[i] + (1.0 - beta2) * (gf[i] * gf[i])
            mo[i] = mi
            vo[i] = vi
            po[i] = pf[i] - lr * (mi / bc1) / (sqrt(vi / bc2) + eps)
    return p_new, m_new, v_new
