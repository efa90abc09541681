"""Exchange mechanics and market-quality metrics for AMM and order-book venues."""

__version__ = "0.1.0"
