"""Learnable constant-determinant flows."""

from isoflow.flows.activations import tanh_poly, tanh_poly_derivative
from isoflow.flows.checkpoint import load_checkpoint, save_checkpoint
from isoflow.flows.config import (
    ConvNetConfig,
    FeedForwardNetConfig,
    FixedFilterNetConfig,
    FlowConfig,
)
from isoflow.flows.layers import ActNorm, AdditiveCoupling, HouseholderStack, householder_apply
from isoflow.flows.masks import MaskSpec
from isoflow.flows.model import FlowModel, build_flow, flow_vjp
from isoflow.flows.params import ParamVector

__all__ = [
    "ActNorm",
    "AdditiveCoupling",
    "ConvNetConfig",
    "FeedForwardNetConfig",
    "FixedFilterNetConfig",
    "FlowConfig",
    "FlowModel",
    "HouseholderStack",
    "MaskSpec",
    "ParamVector",
    "build_flow",
    "flow_vjp",
    "householder_apply",
    "load_checkpoint",
    "save_checkpoint",
    "tanh_poly",
    "tanh_poly_derivative",
]
