"""Layout ground truth for scientific article pages.

Matches text extracted from PDF pages against the article's XML, turns the
matches into five-category layout annotations, keeps pages whose coverage
is high enough, splits them by journal and exports COCO files.
"""

from .categories import LayoutCategory
from .elements import BBox, PageElements, Textbox, Textline, load_page_elements
from .article import Article, parse_article, prepare_groups
from .fuzzy import find_near_match, levenshtein, max_distance
from .textnorm import normalize_kd
from .geometry import LayoutAnnotation, RectilinearPolygon, textline_segmentation
from .pipeline import AnnotateConfig, DocumentResult, annotate_document, region_to_annotation
from .quality import accept_page, annotation_quality
from .partition import classify_page, eligible_journals, make_split
from .coco import export_coco, import_coco
from .evaluate import iou, average_precision, map_50_95
from .estimators import JournalPartitioner, LayoutAnnotator

__version__ = "0.1.0"
