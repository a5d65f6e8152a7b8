"""Coverage-guided fuzzing loop and engine strategies."""
from .campaign import (Campaign, CampaignResult, CampaignStats, CrashRecord, CrashSet, crash_key,
                       load_dict, load_seeds, run_campaign, triage_crash)
from .engines import (ENGINES, Corpus, CorpusEntry, assign_energy, fairfuzz_compute_mask,
                      rare_branches, select_next)
from .rng import SplitMix64

__all__ = ["Campaign", "CampaignResult", "CampaignStats", "CrashRecord", "CrashSet", "crash_key",
           "load_dict", "load_seeds", "run_campaign", "triage_crash", "ENGINES", "Corpus",
           "CorpusEntry", "assign_energy", "fairfuzz_compute_mask", "rare_branches", "select_next",
           "SplitMix64"]
