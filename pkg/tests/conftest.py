import numpy as np
import pytest

from pacuplan import GenSpec, Instance, LognormalParams, Patient, Surgeon, generate_instance


def make_patient(pid="p1", surgeon="s1", or_id=1, needs_recovery=True,
                 surgery=(0.0, 0.1), recovery=(-0.5, 0.1), duration=None,
                 setup=0.0, cleanup=0.0):
    return Patient(id=pid, surgeon_id=surgeon, or_id=or_id, needs_recovery=needs_recovery,
                   surgery=LognormalParams(*surgery), recovery=LognormalParams(*recovery),
                   expected_duration=duration, setup=setup, cleanup=cleanup)


def make_instance(patients, surgeons=None, or_count=None, or_open_hours=8.0, day_hours=24.0):
    if surgeons is None:
        ids = sorted({p.surgeon_id for p in patients})
        surgeons = [Surgeon(id=s, shift_start=0.0, shift_end=or_open_hours) for s in ids]
    if or_count is None:
        or_count = max((p.or_id for p in patients), default=0)
    return Instance(surgeons=surgeons, patients=patients, or_count=or_count,
                    or_open_hours=or_open_hours, day_hours=day_hours)


@pytest.fixture
def empty_instance():
    return Instance(surgeons=[], patients=[], or_count=0)


@pytest.fixture(scope="session")
def default_instance():
    return generate_instance(GenSpec())


def random_genspec(rng: np.random.Generator) -> GenSpec:
    """Random day-scale generator configs.

    Per-OR workloads are kept at surgical-day scale (as in the default
    21-OR/61-patient shape): an OR chain of other surgeons' cases longer
    than two working days would force a trailing surgeon's overtime past
    its cap no matter the schedule, i.e. the instance itself would be
    infeasible, which is not what the feasibility property is about.
    """
    ors = int(rng.integers(1, 9))
    if rng.random() < 0.5:
        surgeons = int(rng.integers(1, ors + 1))  # one block per OR, any size
        patients = int(rng.integers(surgeons, 3 * surgeons + 1))
    else:
        surgeons = int(rng.integers(1, 2 * ors + 1))  # up to two blocks per OR
        patients = surgeons + int(rng.integers(0, 3))
    return GenSpec(or_count=ors, surgeon_count=surgeons, patient_count=patients,
                   recovery_fraction=float(rng.uniform(0, 1)),
                   seed=int(rng.integers(2**32)))
