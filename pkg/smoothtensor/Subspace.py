import numpy as np

from smoothtensor.utils.assertion import check_matrix, check_dimension

ORTHONORMAL_TOL = 1e-10


class Subspace(object):
    def __init__(self, basis: np.ndarray):
        """
        Подпространство, заданное ортонормированным базисом (столбцы).

        :param basis: матрица ambient x dim с ортонормированными столбцами
        :raise ValueError: когда столбцы не ортонормированы с точностью 1e-10
        """
        basis = np.array(basis, dtype=float)
        check_matrix(basis, 'basis')
        gram = basis.T @ basis
        if gram.size and np.abs(gram - np.eye(gram.shape[0])).max() > ORTHONORMAL_TOL:
            raise ValueError("subspace basis must be orthonormal")
        basis.flags.writeable = False
        self._basis = basis

    @classmethod
    def zero(cls, ambient: int) -> 'Subspace':
        check_dimension(ambient)
        return Subspace(np.zeros((ambient, 0)))

    @classmethod
    def span(cls, vectors: np.ndarray, rtol: float = 1e-10) -> 'Subspace':
        """
        Подпространство, натянутое на столбцы матрицы; векторы ниже ранговой точности отбрасываются.
        """
        vectors = np.asarray(vectors, dtype=float)
        if vectors.shape[1] == 0:
            return Subspace.zero(vectors.shape[0])
        u, s, _ = np.linalg.svd(vectors, full_matrices=False)
        rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
        return Subspace(u[:, :rank])

    @property
    def ambient(self) -> int:
        return self._basis.shape[0]

    @property
    def dim(self) -> int:
        return self._basis.shape[1]

    @property
    def basis(self) -> np.ndarray:
        return self._basis

    def projector(self) -> np.ndarray:
        return self._basis @ self._basis.T

    def complement(self) -> 'Subspace':
        """
        :return: ортогональное дополнение
        """
        q, _ = np.linalg.qr(np.hstack([self._basis, np.eye(self.ambient)]))
        return Subspace(q[:, self.dim:])

    def __repr__(self) -> str:
        return f'Subspace(ambient={self.ambient}, dim={self.dim})'
