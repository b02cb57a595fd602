"""Counting and certifying monochromatic arithmetic progressions in finite groups."""

from .groups import (
    FiniteGroup,
    OrderProfile,
    build_cyclic,
    build_dihedral,
    build_direct_product,
    build_quaternion,
    build_symmetric,
    element_order,
    euler_phi,
    from_cayley_table,
    order_profile,
    parse_group_spec,
)

__version__ = "0.1.0"
