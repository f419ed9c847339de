import pytest

from src.config import WORKERS_ENV, default_workers
from src.device_manager import DeviceManager, device_manager
from src.errors import ConfigError, ResourceError


def test_singleton():
    assert DeviceManager() is device_manager


def test_resolve_device():
    assert device_manager.resolve_device("cpu") == "cpu"
    assert device_manager.resolve_device("auto") in device_manager.get_available_devices_list()
    with pytest.raises(ConfigError, match="device"):
        device_manager.resolve_device("tpu:3")


def test_memory_guard():
    device_manager.check_memory(1024, "cpu")
    with pytest.raises(ResourceError, match="batch_size"):
        device_manager.check_memory(1 << 62, "cpu")


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert default_workers() == 3
    assert device_manager.default_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, "zero")
    assert default_workers() >= 1
    monkeypatch.delenv(WORKERS_ENV)
    assert default_workers() >= 1
