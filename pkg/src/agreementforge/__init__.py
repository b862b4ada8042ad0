"""agreementforge: ontological smart contracts over a hash-chained ledger.

Business agreements from the multimodal-transportation domain (ridesharing
bookings and incentives) are represented as RDF smart contracts, their
conditionals are evaluated deterministically against a replayable ledger,
and the resulting knowledge base answers the domain's competency questions.
"""

__version__ = "0.1.0"
