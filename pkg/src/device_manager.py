# src/device_manager.py
import logging
import threading
from dataclasses import dataclass
from typing import Dict, List

import psutil
import torch

from src.config import default_workers
from src.errors import ConfigError, ResourceError

logger = logging.getLogger(__name__)


@dataclass
class DeviceInfo:
    """Device information data class"""
    device_type: str  # 'cuda' or 'cpu'
    device_id: int  # GPU ID for CUDA, always 0 for CPU
    total_memory: int  # bytes
    available_memory: int  # bytes
    is_available: bool


class DeviceManager:
    """
    Picks the torch device for covariance batches and guards memory before
    large allocations. Memory figures are refreshed on every query.
    """
    _instance = None
    _lock = threading.Lock()

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not hasattr(self, '_initialized'):
            self._devices: Dict[str, DeviceInfo] = {}
            self._initialized = True
            self._discover_devices()

    def _discover_devices(self):
        """Discover available devices"""
        vm = psutil.virtual_memory()
        self._devices['cpu'] = DeviceInfo('cpu', 0, vm.total, vm.available, True)

        if torch.cuda.is_available():
            for i in range(torch.cuda.device_count()):
                name = f'cuda:{i}'
                try:
                    total = torch.cuda.get_device_properties(i).total_memory
                    self._devices[name] = DeviceInfo('cuda', i, total, total, True)
                    logger.info("Discovered CUDA device: %s (Memory: %.1fGB)", name, total / 1024**3)
                except Exception as e:
                    logger.warning("Error initializing CUDA device %d: %s", i, e)

        logger.debug("Device discovery completed: %s", list(self._devices.keys()))

    def _refresh(self, device_name: str):
        info = self._devices[device_name]
        if info.device_type == 'cpu':
            info.available_memory = psutil.virtual_memory().available
            return
        try:
            free, _ = torch.cuda.mem_get_info(info.device_id)
            info.available_memory = free
        except Exception as e:
            logger.warning("Error querying %s: %s", device_name, e)
            info.is_available = False

    def get_available_devices_list(self) -> List[str]:
        """CUDA devices by id, then CPU."""
        cuda = sorted((d for d, i in self._devices.items() if i.device_type == 'cuda' and i.is_available),
                      key=lambda d: int(d.split(':')[1]))
        return cuda + ['cpu']

    def get_best_device(self, memory_requirement: int = 0, prefer_cuda: bool = True) -> str:
        """
        Device with the most free memory that fits memory_requirement bytes.
        CUDA devices come first when prefer_cuda is set; CPU is the fallback.
        """
        best, best_free = 'cpu', -1
        cuda = [d for d in self.get_available_devices_list() if d != 'cpu'] if prefer_cuda else []
        for name in cuda:
            self._refresh(name)
            info = self._devices[name]
            free = info.available_memory
            if info.is_available and free >= memory_requirement and free > best_free:
                best, best_free = name, free
        logger.info("Selected device for %.1fMB: %s", memory_requirement / 1024**2, best)
        return best

    def resolve_device(self, device: str, memory_requirement: int = 0) -> str:
        """Map 'auto' to the best device and validate explicit names."""
        if device == 'auto':
            return self.get_best_device(memory_requirement)
        if device == 'cuda':
            device = 'cuda:0'
        if device not in self._devices:
            raise ConfigError(f"device: {device!r} is not available (choose from {self.get_available_devices_list()} or 'auto')")
        return device

    def check_memory(self, n_bytes: int, device: str = 'cpu'):
        """Raise ResourceError when device lacks n_bytes of free memory."""
        name = 'cuda:0' if device == 'cuda' else device
        if name not in self._devices:
            raise ConfigError(f"device: {device!r} is not available")
        self._refresh(name)
        free = self._devices[name].available_memory
        if n_bytes > free:
            raise ResourceError(
                f"{device}: estimated {n_bytes / 1024**2:.0f}MB needed, {free / 1024**2:.0f}MB free; "
                f"reduce batch_size or workers")

    def default_workers(self) -> int:
        return default_workers()


# Global device manager instance
device_manager = DeviceManager()
