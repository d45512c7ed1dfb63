import pytest

from dfgen.domains import combined_registry, multiwoz, smcal


@pytest.fixture(scope="session")
def cal_registry():
    return smcal.load_registry()


@pytest.fixture(scope="session")
def cal_kb():
    return smcal.load_kb()


@pytest.fixture(scope="session")
def cal_templates():
    return smcal.load_templates()


@pytest.fixture(scope="session")
def cal_context(cal_kb, cal_registry):
    return smcal.calendar_context(cal_kb, cal_registry)


@pytest.fixture(scope="session")
def cal_samples():
    with open(smcal.data_path("smcal_samples.txt"), encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


@pytest.fixture(scope="session")
def rest_domain():
    return multiwoz.MwozDomain()


@pytest.fixture(scope="session")
def rest_registry(rest_domain):
    return rest_domain.registry


@pytest.fixture(scope="session")
def rest_agendas(rest_domain):
    return multiwoz.load_agendas(None, rest_domain.registry)


@pytest.fixture(scope="session")
def full_registry():
    return combined_registry()
