"""Video-caption evaluation suite.

Submodules:
  corpus      -- videos, reference caption sets, system runs
  text        -- tokenization, Porter stemming, synonym lexicons
  metrics     -- segment-level BLEU / METEOR / CIDEr / lexical STS / MIR
  degradation -- quality-control caption degradation
  hitplan     -- assessment batch (HIT) assembly
  analytics   -- worker quality control and system scoring
  stats       -- nonparametric tests, correlations, meta-evaluation
  simcrowd    -- simulated assessor populations
  server      -- rating-collection HTTP service
  cli         -- operator command surface
"""

__version__ = "0.1.0"
