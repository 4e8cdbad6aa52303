"""From-scratch deterministic policy gradient agent."""

from .ddpg import DDPGAgent, DDPGConfig, LearningCurve, ReplayBuffer, train
from .nets import Adam, NetworkParameters, RunningNormalizer, soft_update
from .tasks import AbstractTask, abstract_policy
