"""examgrid: remote testing toolkit.

Subpackages cover the exam document format (vqp), the distributable
container (rts), drop-box transport (transport), the gesture pipeline
(gesture), environment attestation (envcheck), marking, the exam
lifecycle state machine (session), an HTTP service (service) and the
examctl command line driver (cli).
"""

__version__ = "0.1.0"
