"""Finite-field codes used by the federated protocol."""
from .agreement import order_agreement, permutation_from_draws, sequence_positions
from .bh import BhSequence, bh_decompose, construct_bh, is_bh, is_bh_upto
from .labels import build_label_vector, split_label_vector
from .primes import field_size, is_prime, next_prime
from .scma import (PrimeField, aggregate, generate_masks, scma_decode, scma_encode,
                   share_from_bytes, share_to_bytes)
