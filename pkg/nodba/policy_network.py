"""
Softmax policy network: a small dense RELU network whose weights live in one flat parameter vector, so that
derivative-free optimizers can treat the whole policy as a point in R^d.

theta layout, layer by layer: weight matrix of shape (fan_in, fan_out) flattened row-major, then the fan_out
biases. A layer computes h @ W + b.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from nodba.environment import Action
from nodba.errors import AllMaskedError, DimensionMismatchError, PolicyParseError

RELU = 'relu'
SOFTMAX = 'softmax'
GREEDY = 'greedy'
SAMPLE = 'sample'


@dataclass(frozen=True)
class NetArch:
    """
    Attributes:
        input_dim (int): n_fixed * m + m
        output_dim (int): m, one logit per create-index action
        hidden_layers (int): Number of hidden layers
        hidden_width (int): Neurons per hidden layer
    """
    input_dim: int
    output_dim: int
    hidden_layers: int = 4
    hidden_width: int = 8
    hidden_activation: str = RELU
    output_activation: str = SOFTMAX

    def __post_init__(self):
        if min(self.input_dim, self.output_dim, self.hidden_layers, self.hidden_width) < 1:
            raise DimensionMismatchError(f'All network dimensions must be positive: {self}')

    @classmethod
    def for_env(cls, m: int, n_fixed: int, hidden_layers: int = 4, hidden_width: int = 8) -> 'NetArch':
        return cls(input_dim=n_fixed * m + m, output_dim=m, hidden_layers=hidden_layers, hidden_width=hidden_width)

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        widths = [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]
        return list(zip(widths[:-1], widths[1:]))

    @property
    def param_count(self) -> int:
        return sum(fan_in * fan_out + fan_out for fan_in, fan_out in self.layer_shapes)

    def to_dict(self) -> Dict[str, int]:
        return {'input_dim': self.input_dim,
                'hidden_layers': self.hidden_layers,
                'hidden_width': self.hidden_width,
                'output_dim': self.output_dim}


@dataclass(frozen=True, eq=False)
class PolicyParams:
    arch: NetArch
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64).ravel()
        if theta.size != self.arch.param_count:
            raise DimensionMismatchError(
                f'theta has {theta.size} entries, architecture needs {self.arch.param_count}')
        theta.setflags(write=False)
        object.__setattr__(self, 'theta', theta)

    @classmethod
    def zeros(cls, arch: NetArch) -> 'PolicyParams':
        return cls(arch, np.zeros(arch.param_count))

    def layers(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        out, offset = [], 0
        for fan_in, fan_out in self.arch.layer_shapes:
            w = self.theta[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
            offset += fan_in * fan_out
            b = self.theta[offset:offset + fan_out]
            offset += fan_out
            out.append((w, b))
        return out


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max())
    return z / z.sum()


def forward(params: PolicyParams, inputs: np.ndarray) -> np.ndarray:
    """
    Probability vector over the m actions for one encoded state
    """
    h = np.asarray(inputs, dtype=np.float64)
    if h.shape != (params.arch.input_dim,):
        raise DimensionMismatchError(f'Expected input of length {params.arch.input_dim}, got shape {h.shape}')

    layers = params.layers()
    for w, b in layers[:-1]:
        h = np.maximum(h @ w + b, 0.0)
    w, b = layers[-1]

    return softmax(h @ w + b)


def select_action(dist: np.ndarray, mask: np.ndarray, mode: str = GREEDY, rng: np.random.Generator = None) -> Action:
    """
    Pick an action among the permitted entries of mask. Greedy takes the argmax of the masked distribution, ties to
    the lowest column; sample draws from the distribution renormalized over the permitted entries.
    """
    dist = np.asarray(dist, dtype=np.float64)
    allowed = np.asarray(mask).astype(bool)
    if dist.shape != allowed.shape:
        raise DimensionMismatchError(f'Distribution shape {dist.shape} does not match mask shape {allowed.shape}')
    if not allowed.any():
        raise AllMaskedError('Every action is masked')

    masked = np.where(allowed, dist, 0.0)
    total = masked.sum()
    # permitted probabilities can all underflow to zero
    probs = masked / total if total > 0 else allowed / allowed.sum()

    if mode == GREEDY:
        return Action(int(np.argmax(np.where(allowed, probs, -np.inf))))
    if mode == SAMPLE:
        rng = rng if rng is not None else np.random.default_rng()
        choice = int(rng.choice(probs.size, p=probs))
        # p has exact zeros on masked entries, so choice is always permitted
        return Action(choice)

    raise ValueError(f'Unknown selection mode {mode!r}')


def params_to_dict(params: PolicyParams) -> Dict[str, Any]:
    return {'arch': params.arch.to_dict(), 'theta': params.theta.tolist()}


def params_from_dict(raw: Dict[str, Any]) -> PolicyParams:
    try:
        arch_raw = raw['arch']
        arch = NetArch(input_dim=int(arch_raw['input_dim']),
                       output_dim=int(arch_raw['output_dim']),
                       hidden_layers=int(arch_raw['hidden_layers']),
                       hidden_width=int(arch_raw['hidden_width']))
        theta = raw['theta']
    except (KeyError, TypeError, ValueError) as e:
        raise PolicyParseError(f'Malformed policy: {e}') from e

    if not isinstance(theta, list) or not all(isinstance(t, (int, float)) for t in theta):
        raise PolicyParseError('theta must be a list of numbers')
    if len(theta) != arch.param_count:
        raise PolicyParseError(f'theta has {len(theta)} entries, architecture needs {arch.param_count}')

    return PolicyParams(arch, np.asarray(theta, dtype=np.float64))
