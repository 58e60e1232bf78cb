"""catloop: measurement-based optical loop circuit simulation and control.

Subpackages and modules:
    fock      truncated-Fock-space states, gates, measurements, channels
    env       the loop-circuit decision process
    ppo       from-scratch actor-critic training and evaluation
    onestep   single-step heralding sweeps and cat fits
    breeding  cat/GKP breeding pipelines
    cli       command-line interface
"""

__version__ = "0.1.0"
