"""Compile Alice&Bob narrations into prudent role implementations."""

from .basis import ContextPair, Equation, equality_basis, holds, refines, unification_system_of
from .compiler import ActiveFrame, NotExecutable, ReceiveStep, SendStep, compile_role, executability_check
from .deduction import reach, saturate
from .narration import Narration, NarrationError, parse_narration, validate_narration
from .rewriting import DeductionSystem, dolev_yao, equal_mod, normalize, parse_theory, validate_subterm_convergent
from .roles import RoleSpec, extract_roles, role_input
from .terms import Signature, Step, Term, parse_term
from .theories import builtin_theories, nspk_text, theory_store
from .xor import XorSystem, xor_basis, xor_reach

__version__ = "0.1.0"
