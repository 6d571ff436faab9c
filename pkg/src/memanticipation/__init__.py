"""Memristive anticipation: threshold memristor resonators that learn and complete pulse patterns."""
from .anticipator import BitAnticipator, SlotState, classify_slot
from .array import AnticipatorBank, run_noisy, run_sequence, run_with_failure
from .device import MemristorParams, MemristorState, Orientation
from .oscillator import OscillatorParams, eigen_analysis, simulate
from .signals import BitPattern, FrameSequence, PulseSpec

__version__ = "0.1.0"
