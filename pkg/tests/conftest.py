import numpy as np

from rotsync import RcmParams, generate_instance, random_rotation


def make_stack(n, d, seed):
    """Random rotation stack with a fixed seed."""
    return random_rotation(d, np.random.default_rng(seed), size=n)


def make_instance(n=30, d=3, p=0.7, q=0.7, sigma=0.0, seed=0):
    return generate_instance(RcmParams(n=n, d=d, p=p, q=q, sigma=sigma, seed=seed))
