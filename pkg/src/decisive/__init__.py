"""Creature-based forcing combinatorics at finite scale."""
from . import creatures, decision, extnat, homogenize, rank, schedules, serialize, towers, verify
from .creatures import SplitCreature, TabularCreature, TabularCreatureSystem
from .decision import FiniteCondition, NameTable, basic_step, decision_status, pure_decide
from .extnat import compare, ext, parse, pow2
from .homogenize import HomogenizationInstance, multi_homogenize
from .rank import RankParams, choose_J, ns, prenorm, psi
from .schedules import ConstSchedule, DefaultSchedule, TableSchedule, parse_schedule
from .verify import Big, Decisive, Exhaustive, Halving, HereditarilyBig, Sample, verify as check

__version__ = "0.1.0"
