from smoothtensor.utils.assertion import check_positive


class FoobiParams(object):
    def __init__(self, retries: int = 20, gap_floor: float = 1.0, rank_rtol: float = 1e-10,
                 symmetry_tol: float = 1e-8):
        """
        Параметры разложения.

        :param retries: число попыток получить случайный элемент ядра с достаточным разрывом спектра
        :param gap_floor: множитель порога разрыва; порог равен gap_floor / (20 R^2)
        :param rank_rtol: относительный допуск ранга для квадратного корня
        :param symmetry_tol: допуск несимметричности матрицы PSD проекции
        """
        if retries < 1:
            raise ValueError("retries must be greater than or equal to one")
        check_positive(gap_floor, 'gap floor')
        check_positive(rank_rtol, 'rank tolerance')
        self.retries = retries
        self.gap_floor = gap_floor
        self.rank_rtol = rank_rtol
        self.symmetry_tol = symmetry_tol

    def gap_threshold(self, r: int) -> float:
        return self.gap_floor / (20.0 * r * r)

    def to_json(self):
        return {
            'retries': self.retries,
            'gap_floor': self.gap_floor,
            'rank_rtol': self.rank_rtol,
            'symmetry_tol': self.symmetry_tol,
        }

    @classmethod
    def from_json(cls, data) -> 'FoobiParams':
        return FoobiParams(**data)

    def __repr__(self) -> str:
        return f'FoobiParams(retries={self.retries}, gap_floor={self.gap_floor}, rank_rtol={self.rank_rtol})'
