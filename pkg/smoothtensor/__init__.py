from smoothtensor.CoefficientMatrix import CoefficientMatrix
from smoothtensor.DenseTensor import DenseTensor
from smoothtensor.ExperimentConfig import ExperimentConfig
from smoothtensor.FoobiParams import FoobiParams
from smoothtensor.HmmModel import HmmModel
from smoothtensor.MonomialSpec import MonomialSpec
from smoothtensor.PerturbationModel import PerturbationModel
from smoothtensor.RecoveryParams import RecoveryParams
from smoothtensor.ResultRow import ResultRow
from smoothtensor.Subspace import Subspace
from smoothtensor.SymTensor import SymTensor
from smoothtensor.TrialReport import TrialReport

name = "smoothtensor"
