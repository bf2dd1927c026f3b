"""Integer matrix normal forms over Python ints (arbitrary precision).

Matrices are plain lists of lists of ``int``.
"""
from __future__ import annotations


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(a))]


def transpose(a, ncols=None):
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(row) for row in zip(*a)]


def smith_normal_form(a):
    """Return ``(U, D, V)`` with ``U @ a @ V == D`` and ``U``, ``V`` unimodular.

    ``D`` is diagonal with nonnegative entries, each dividing the next.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(map(int, row)) for row in a]
    u = identity(m)
    v = identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        if q:
            d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
            u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col_dst += q * col_src
        if q:
            for row in d:
                row[dst] += q * row[src]
            for row in v:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            pivot = None
            for i in range(t, m):
                for j in range(t, n):
                    if d[i][j] and (pivot is None or abs(d[i][j]) < abs(d[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                return u, d, v
            swap_rows(t, pivot[0])
            swap_cols(t, pivot[1])
            p = d[t][t]
            clean = True
            for i in range(t + 1, m):
                q = d[i][t] // p
                add_row(t, i, -q)
                if d[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = d[t][j] // p
                add_col(t, j, -q)
                if d[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if d[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return u, d, v


def diagonal(d):
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def echelon_basis(vectors, dim):
    """Row-echelon (Hermite) basis of the lattice spanned by ``vectors`` in Z^dim.

    Pivots are positive and entries above each pivot are reduced into
    ``[0, pivot)``, so the result is canonical for the lattice.
    """
    rows = [list(map(int, v)) for v in vectors if any(v)]
    basis = []
    col = 0
    while rows and col < dim:
        nz = [r for r in rows if r[col]]
        if not nz:
            col += 1
            continue
        rest = [r for r in rows if not r[col]]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            reduced = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                if r[col]:
                    reduced.append(r)
                elif any(r):
                    rest.append(r)
            nz = reduced
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append((col, piv))
        rows = rest
        col += 1
    out = [row for _, row in basis]
    for k in range(len(out)):
        c = basis[k][0]
        for j in range(k):
            q = out[j][c] // out[k][c]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[k])]
    return out


def lattice_coordinates(basis, v):
    """Integer coefficients ``c`` with ``sum(c_j * basis_j) == v``.

    ``basis`` must come from :func:`echelon_basis`. Raises ``ValueError`` when
    ``v`` is not in the lattice.
    """
    rem = list(map(int, v))
    coords = []
    for row in basis:
        c = next(i for i, x in enumerate(row) if x)
        q, r = divmod(rem[c], row[c])
        if r:
            raise ValueError(f"vector {tuple(v)} is not in the lattice")
        coords.append(q)
        rem = [x - q * y for x, y in zip(rem, row)]
    if any(rem):
        raise ValueError(f"vector {tuple(v)} is not in the lattice")
    return coords


def rank(a):
    if not a:
        return 0
    _, d, _ = smith_normal_form(a)
    return sum(1 for x in diagonal(d) if x)


def determinant(a):
    """Exact integer determinant by fraction-free elimination (Bareiss)."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(map(int, row)) for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def inverse_unimodular(a):
    """Inverse of a unimodular integer matrix (exact)."""
    n = len(a)
    aug = [list(map(int, row)) + identity(n)[i] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if abs(aug[r][c]) == 1), None)
        while piv is None:
            nz = [r for r in range(c, n) if aug[r][c]]
            if not nz:
                raise ValueError("matrix is singular")
            nz.sort(key=lambda r: abs(aug[r][c]))
            p = nz[0]
            for r in nz[1:]:
                q = aug[r][c] // aug[p][c]
                aug[r] = [x - q * y for x, y in zip(aug[r], aug[p])]
            piv = next((r for r in range(c, n) if abs(aug[r][c]) == 1), None)
            if piv is None and len([r for r in range(c, n) if aug[r][c]]) == 1:
                raise ValueError("matrix is not unimodular")
        aug[c], aug[piv] = aug[piv], aug[c]
        if aug[c][c] < 0:
            aug[c] = [-x for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                q = aug[r][c]
                aug[r] = [x - q * y for x, y in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]
