"""scikit-learn style wrapper turning an event stream into a metrics panel."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .amm.state import PoolConfig, PoolState
from .ingest import ParseResult, StaticPriceFeed, replay
from .metrics.liquidity import DEFAULT_PCTS, DEFAULT_SIZES_USD
from .metrics.panel import MetricsParams, Panel, columns, compute_metrics
from .exceptions import ValidationError
from .validation import check_cutoff, check_interval, check_pcts, check_positive, check_sizes


class PoolMetricsTransformer(TransformerMixin, BaseEstimator):
    """Replay pool events and emit one row of market-quality metrics per interval.

    ``transform`` takes a list of :class:`~clamm.ingest.PoolEvent` (or a
    :class:`~clamm.ingest.ParseResult`) and returns a float array with one
    column per :meth:`get_feature_names_out` entry; absent values are NaN.
    The replay starts from ``genesis`` if given, otherwise from an empty pool
    with ``config`` at ``initial_price``. ``price_feed`` needs ``at(ts)``;
    a ``(usd_x, usd_y)`` pair is accepted as a constant feed.
    """

    def __init__(self, config=None, initial_price=None, genesis=None, price_feed=None, interval_seconds=300,
                 pcts=DEFAULT_PCTS, sizes_usd=DEFAULT_SIZES_USD, jit_filter=True, outlier_cutoff=0.20,
                 weighted=False, window_seconds=300):
        self.config = config
        self.initial_price = initial_price
        self.genesis = genesis
        self.price_feed = price_feed
        self.interval_seconds = interval_seconds
        self.pcts = pcts
        self.sizes_usd = sizes_usd
        self.jit_filter = jit_filter
        self.outlier_cutoff = outlier_cutoff
        self.weighted = weighted
        self.window_seconds = window_seconds

    def fit(self, X=None, y=None):
        if self.genesis is None:
            if not isinstance(self.config, PoolConfig):
                raise ValidationError("config must be a PoolConfig when no genesis snapshot is given")
            check_positive("initial_price", self.initial_price)
        elif not isinstance(self.genesis, PoolState):
            raise ValidationError("genesis must be a PoolState")
        feed = self.price_feed
        if feed is None:
            raise ValidationError("price_feed is required")
        if not hasattr(feed, "at"):
            try:
                usd_x, usd_y = feed
            except (TypeError, ValueError) as exc:
                raise ValidationError("price_feed needs at(ts) or a (usd_x, usd_y) pair") from exc
            feed = StaticPriceFeed(usd_x, usd_y)
        self.feed_ = feed
        self.params_ = MetricsParams(
            interval_seconds=check_interval(self.interval_seconds),
            pcts=check_pcts(self.pcts),
            sizes_usd=check_sizes(self.sizes_usd),
            jit_filter=bool(self.jit_filter),
            outlier_cutoff=check_cutoff(self.outlier_cutoff),
            weighted=bool(self.weighted),
            window_seconds=check_interval(self.window_seconds),
        )
        self.feature_names_out_ = np.asarray(columns(self.params_.pcts, self.params_.sizes_usd), dtype=object)
        self.n_features_out_ = len(self.feature_names_out_)
        return self

    def transform_rows(self, X) -> Panel:
        """Like :meth:`transform` but returns the :class:`Panel` of rows plus a summary."""
        check_is_fitted(self, "params_")
        events = X.events if isinstance(X, ParseResult) else list(X)
        if self.genesis is not None:
            replayed = replay(events, genesis=self.genesis)
            start_snapshot = self.genesis
        else:
            replayed = replay(events, self.config, self.initial_price)
            start_snapshot = PoolState(self.config, self.initial_price)
        return compute_metrics(replayed, self.feed_, self.params_, initial_snapshot=start_snapshot)

    def transform(self, X):
        panel = self.transform_rows(X)
        out = np.full((len(panel.rows), self.n_features_out_), np.nan)
        for r, row in enumerate(panel.rows):
            for c, v in enumerate(row.values()):
                if v is not None:
                    out[r, c] = float(v)
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_out_")
        return self.feature_names_out_.copy()
