from .inversion import reverse_engineer_r2
from .sizing import SampleSize, power_two_proportions, sample_size_two_proportions

__all__ = [
    'reverse_engineer_r2',
    'SampleSize',
    'power_two_proportions',
    'sample_size_two_proportions',
]
