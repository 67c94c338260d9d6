"""Interbank overnight networks, EDB liquidity contagion and systemic-risk statistics."""
from .coreperiphery import CorePeripheryPartition, cp_error, fit_core_periphery
from .econostats import (
    PanelDataset,
    RegressionResult,
    build_panel,
    fe_regression,
    ks_two_sample,
)
from .edb import (
    SCENARIOS,
    EnsembleResult,
    ScenarioSpec,
    SimConfig,
    scenario,
    simulate_ensemble,
)
from .metrics import BankMetrics, NetworkMetrics, bank_metrics, moving_average, network_metrics
from .netcore import (
    QuarterlyNetwork,
    TransactionRecord,
    build_quarterly_networks,
    weakly_connected_component,
)
from .nullmodel import DECMParameters, null_risk_test, sample_null, solve_decm
from .special import regularized_incomplete_beta
from .synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BankMetrics",
    "CorePeripheryPartition",
    "DECMParameters",
    "EnsembleResult",
    "NetworkMetrics",
    "PanelDataset",
    "QuarterlyNetwork",
    "RegressionResult",
    "SCENARIOS",
    "ScenarioSpec",
    "SimConfig",
    "SynthSpec",
    "TransactionRecord",
    "bank_metrics",
    "build_panel",
    "build_quarterly_networks",
    "cp_error",
    "fe_regression",
    "fit_core_periphery",
    "generate",
    "ks_two_sample",
    "moving_average",
    "network_metrics",
    "null_risk_test",
    "regularized_incomplete_beta",
    "sample_null",
    "scenario",
    "simulate_ensemble",
    "solve_decm",
    "weakly_connected_component",
]
