import json
import sys

import pytest

from crowdboard.errors import ConfigError, MetricUnavailableError
from crowdboard.external_metrics import AdapterConfig, external_metric

ECHO_SCRIPT = (
    "import sys, json\n"
    "for line in sys.stdin:\n"
    "    if not line.strip():\n"
    "        continue\n"
    "    rec = json.loads(line)\n"
    "    print(json.dumps({'id': rec['id'], 'score': %s}))\n"
)


def command_adapter(expr: str, name="echo", timeout=20.0) -> AdapterConfig:
    return AdapterConfig(
        name=name,
        kind="command",
        timeout=timeout,
        version="1.0",
        command=(sys.executable, "-c", ECHO_SCRIPT % expr),
    )


class TestAdapterConfig:
    def test_timeout_mandatory_positive(self):
        with pytest.raises(ConfigError):
            AdapterConfig(name="x", kind="command", timeout=0, version="1", command=("c",))

    def test_version_mandatory(self):
        with pytest.raises(ConfigError):
            AdapterConfig(name="x", kind="command", timeout=5, version="", command=("c",))

    def test_http_needs_url(self):
        with pytest.raises(ConfigError):
            AdapterConfig(name="x", kind="http", timeout=5, version="1")


class TestCommandAdapter:
    def test_constant_half_scores(self):
        result = external_metric(
            command_adapter("0.5"), ["hyp one", "hyp two"], [["r"], ["r"]]
        )
        assert result.corpus_score == pytest.approx(0.5)
        assert result.per_instance_scores == (0.5, 0.5)
        assert "version=1.0" in result.config_fingerprint

    def test_negative_scores_accepted_unclamped(self):
        result = external_metric(command_adapter("-22.2"), ["h"], [["r"]])
        assert result.corpus_score == pytest.approx(-22.2)

    def test_nan_marks_unavailable(self):
        with pytest.raises(MetricUnavailableError, match="non-finite"):
            external_metric(command_adapter("float('nan')"), ["h"], [["r"]])

    def test_missing_ids_mark_unavailable(self):
        adapter = AdapterConfig(
            name="silent",
            kind="command",
            timeout=20.0,
            version="1.0",
            command=(sys.executable, "-c", "pass"),
        )
        with pytest.raises(MetricUnavailableError, match="missing scores"):
            external_metric(adapter, ["h"], [["r"]])

    def test_timeout_marks_unavailable(self):
        adapter = AdapterConfig(
            name="slow",
            kind="command",
            timeout=0.4,
            version="1.0",
            command=(sys.executable, "-c", "import time; time.sleep(5)"),
        )
        with pytest.raises(MetricUnavailableError, match="timed out"):
            external_metric(adapter, ["h"], [["r"]])

    def test_nonzero_exit_marks_unavailable(self):
        adapter = AdapterConfig(
            name="crash",
            kind="command",
            timeout=20.0,
            version="1.0",
            command=(sys.executable, "-c", "raise SystemExit(3)"),
        )
        with pytest.raises(MetricUnavailableError, match="exit code 3"):
            external_metric(adapter, ["h"], [["r"]])


class TestHttpAdapter:
    def test_http_round_trip(self, monkeypatch):
        import httpx

        def fake_post(url, content, headers, timeout):
            lines = []
            for line in content.decode().splitlines():
                if line.strip():
                    rec = json.loads(line)
                    lines.append(json.dumps({"id": rec["id"], "score": 0.9}))
            request = httpx.Request("POST", url)
            return httpx.Response(200, text="\n".join(lines), request=request)

        monkeypatch.setattr(httpx, "post", fake_post)
        adapter = AdapterConfig(
            name="hosted", kind="http", timeout=5.0, version="2", url="http://adapter"
        )
        result = external_metric(adapter, ["a", "b"], [["r"], ["r"]], ids=["x", "y"])
        assert result.per_instance_scores == (0.9, 0.9)

    def test_http_error_marks_unavailable(self, monkeypatch):
        import httpx

        def fake_post(url, content, headers, timeout):
            raise httpx.ConnectError("refused")

        monkeypatch.setattr(httpx, "post", fake_post)
        adapter = AdapterConfig(
            name="down", kind="http", timeout=5.0, version="2", url="http://nope"
        )
        with pytest.raises(MetricUnavailableError):
            external_metric(adapter, ["a"], [["r"]])
