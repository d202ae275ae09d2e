"""SysMART: a desk-scale, fully testable smart-supermarket emulation.

Subpackages and modules:
    wiegand     -- Wiegand 26 frame codec and D0/D1 line simulation
    cartlink    -- cart-to-server 80-bit packet codec and random-delay
                   transmission model with collision accounting
    positioning -- floor-tag map, cart reader simulation, grid routing
    foodtrack   -- dynamic-NFC food-tracker tag emulation
    backend     -- store database, HTTP service, local-to-main sync
    simulator   -- deterministic discrete-event store simulation
    cli         -- command-line entry point (``sysmart``)
"""

__version__ = "0.1.0"
