import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdcharge.model import EnergyService, ModelError
from crowdcharge.records import (
    load_queries,
    load_reliability_scores,
    load_services,
    profiles_from_files,
    write_queries,
    write_services,
)
from crowdcharge.simulator import EnvironmentConfig, generate_environment

services_st = st.builds(
    EnergyService,
    id=st.text("abcxyz0123", min_size=1, max_size=6),
    owner_id=st.just("o"),
    area_id=st.sampled_from(["a1", "a2"]),
    start_time=st.integers(-50, 50),
    end_time=st.integers(51, 200),
    intensity_I=st.floats(0, 1e4, allow_nan=False),
    tsr=st.floats(0, 1),
    reliability=st.floats(0, 1),
)


@settings(max_examples=30)
@given(st.lists(services_st, max_size=8), st.sampled_from([".csv", ".json"]))
def test_services_round_trip(tmp_path_factory, services, suffix):
    path = tmp_path_factory.mktemp("rt") / f"services{suffix}"
    write_services(path, services)
    assert load_services(path) == services


def test_queries_round_trip(tmp_path):
    env = generate_environment(EnvironmentConfig(num_queries=12, seed=5))
    write_queries(tmp_path / "q.csv", env.queries)
    assert tuple(load_queries(tmp_path / "q.csv")) == env.queries


def test_bad_row_reports_record_and_field(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("id,owner_id,area_id,start_time,end_time,intensity_I,tsr\n"
                    "A,o,z,0,10,100,1\n"
                    "B,o,z,10,5,100,1\n")
    with pytest.raises(ModelError, match="record 1") as err:
        load_services(path)
    assert err.value.field == "end_time"


def test_reliability_inputs(tmp_path):
    (tmp_path / "soc.csv").write_text(
        "owner_id,time_min,soc\n" + "".join(f"o1,{i * 10},{1 - 0.1 * i}\n" for i in range(5))
    )
    (tmp_path / "hist.csv").write_text("owner_id,ss,tps\no1,3,4\n")
    (tmp_path / "scores.txt").write_text("0.2\n0.8\n")
    [profile] = profiles_from_files(tmp_path / "soc.csv", tmp_path / "hist.csv")
    assert profile.eub == pytest.approx(1.0)  # constant discharge
    assert (profile.successful_services_SS, profile.total_services_TPS) == (3, 4)
    assert load_reliability_scores(tmp_path / "scores.txt") == [0.2, 0.8]
