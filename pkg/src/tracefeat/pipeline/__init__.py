from .config import DEFAULT_KEEP, PipelineConfig
from .corpus import CorpusManifest, ingest, load_rgb
from .evaluation import EvaluationReport, run_evaluation
from .features import cache_to_dataset, extract_features, image_descriptor, read_cache
