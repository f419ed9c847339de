# app.py: interface entry point
"""
# hBN V_B Decoherence

Simulates how the electron spin of a boron vacancy in hexagonal boron nitride
loses coherence to its nuclear spin bath and to two-phonon dephasing.

- Exact dynamics for small baths, Holstein-Primakoff sampling for hundreds of nuclei
- Free induction decay and Hahn echo traces as plot-ready CSV
- Debye-model phonon rates and the combined room-temperature T2
- Run registry with the resolved configuration of every run
- English/French interface

The same engines are available from the command line: python -m src.cli --help
"""
import logging

from src.cli import LOG_FORMAT
from src.ui import build_app_interface

if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    demo = build_app_interface()
    demo.launch(server_name="0.0.0.0", server_port=7860, share=False)
