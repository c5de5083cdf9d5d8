"""
Seed data: built-in benchmark grid, published term sets and dataset sources.
"""

# Simulated benchmark grid: chromosome length and true-set size per predictor count.
SIMULATION_GRID = [
    {"n_main": 5, "max_length": 15, "n_true": 3},
    {"n_main": 20, "max_length": 50, "n_true": 19},
    {"n_main": 30, "max_length": 100, "n_true": 28},
    {"n_main": 40, "max_length": 100, "n_true": 35},
    {"n_main": 50, "max_length": 100, "n_true": 45},
]

BENCH_ENCODINGS = ("standard", "indexed")

WINE_PREDICTORS = [
    "fixed.acidity", "volatile.acidity", "citric.acid", "residual.sugar", "chlorides",
    "free.sulfur.dioxide", "total.sulfur.dioxide", "density", "pH", "sulphates", "alcohol",
]

# Model selected by the standard-chromosome GA on the white wines (CV-AUC fitness).
WINE_STANDARD_TERMS = WINE_PREDICTORS + [
    "fixed.acidity:volatile.acidity", "fixed.acidity:citric.acid",
    "fixed.acidity:free.sulfur.dioxide", "fixed.acidity:total.sulfur.dioxide",
    "fixed.acidity:pH", "fixed.acidity:alcohol",
    "volatile.acidity:chlorides", "volatile.acidity:free.sulfur.dioxide",
    "volatile.acidity:pH", "volatile.acidity:sulphates", "volatile.acidity:alcohol",
    "citric.acid:free.sulfur.dioxide", "citric.acid:total.sulfur.dioxide",
    "residual.sugar:free.sulfur.dioxide", "residual.sugar:density", "residual.sugar:alcohol",
    "chlorides:total.sulfur.dioxide", "chlorides:pH", "chlorides:alcohol",
    "free.sulfur.dioxide:total.sulfur.dioxide", "free.sulfur.dioxide:sulphates",
    "free.sulfur.dioxide:alcohol",
    "total.sulfur.dioxide:density", "total.sulfur.dioxide:pH", "total.sulfur.dioxide:sulphates",
    "density:pH", "pH:sulphates", "pH:alcohol", "sulphates:alcohol",
]
WINE_STANDARD_CV_AUC = 0.8397

# Model selected by the indexed-chromosome GA on the white wines (CV-AUC fitness).
WINE_INDEXED_TERMS = WINE_PREDICTORS + [
    "fixed.acidity:volatile.acidity", "fixed.acidity:citric.acid", "fixed.acidity:chlorides",
    "fixed.acidity:free.sulfur.dioxide", "fixed.acidity:total.sulfur.dioxide",
    "fixed.acidity:pH", "fixed.acidity:alcohol",
    "volatile.acidity:chlorides", "volatile.acidity:free.sulfur.dioxide",
    "volatile.acidity:pH", "volatile.acidity:sulphates", "volatile.acidity:alcohol",
    "citric.acid:free.sulfur.dioxide", "citric.acid:total.sulfur.dioxide",
    "residual.sugar:free.sulfur.dioxide", "residual.sugar:density",
    "residual.sugar:sulphates", "residual.sugar:alcohol",
    "chlorides:total.sulfur.dioxide", "chlorides:density", "chlorides:pH",
    "free.sulfur.dioxide:total.sulfur.dioxide", "free.sulfur.dioxide:sulphates",
    "free.sulfur.dioxide:alcohol",
    "total.sulfur.dioxide:density", "total.sulfur.dioxide:sulphates",
    "density:pH", "density:sulphates", "pH:sulphates", "pH:alcohol",
]
WINE_INDEXED_CV_AUC = 0.8394

CTG_PREDICTORS = [
    "LB", "AC", "FM", "UC", "DL", "DS", "DP", "ASTV", "MSTV", "ALTV", "MLTV",
    "Width", "Min", "Nmax", "Nzeros", "Mode", "Variance", "Tendency",
]

# Model selected by the standard-chromosome GA on cardiotocography (AIC fitness).
CTG_STANDARD_TERMS = CTG_PREDICTORS + [
    "LB:UC", "LB:ALTV", "LB:DL", "LB:Nmax", "LB:Nzeros",
    "AC:FM", "AC:ALTV", "AC:DL", "AC:Variance",
    "FM:UC", "FM:ALTV", "FM:DP", "FM:Min", "FM:Mode", "FM:Tendency",
    "UC:ASTV", "UC:DL", "UC:Nmax", "UC:Nzeros", "UC:Variance",
    "ASTV:ALTV", "ASTV:DP", "ASTV:Width",
    "MSTV:ALTV", "MSTV:Mode",
    "ALTV:MLTV", "ALTV:DL", "ALTV:Mode", "ALTV:Variance",
    "DL:Mode", "DP:Mode", "Width:Min", "Min:Variance", "Nmax:Mode",
    "Nzeros:Mode", "Nzeros:Variance", "Nzeros:Tendency",
    "Mode:Variance", "Mode:Tendency",
]
CTG_STANDARD_AIC = 424.82

# Model selected by the indexed-chromosome GA on cardiotocography (AIC fitness).
# The published coefficient table names only these terms of the 57-term fit, so
# refitting this list does not reproduce CTG_INDEXED_AIC.
CTG_INDEXED_TERMS = CTG_PREDICTORS + [
    "LB:ALTV", "LB:DL",
    "AC:UC", "AC:ALTV", "AC:DL", "AC:Variance",
    "FM:ALTV", "FM:Min", "FM:Variance",
    "UC:ASTV", "UC:MLTV", "UC:DL", "UC:Nmax", "UC:Nzeros", "UC:Variance",
    "ASTV:ALTV", "ASTV:DP", "ASTV:Variance",
    "MSTV:ALTV", "MSTV:DL", "MSTV:DP", "MSTV:Width", "MSTV:Min", "MSTV:Mode", "MSTV:Variance",
    "ALTV:Mode", "ALTV:Variance", "MLTV:DP",
    "DL:Mode", "DP:Mode",
    "Nzeros:Variance", "Nzeros:Tendency", "Mode:Variance", "Mode:Tendency",
]
CTG_INDEXED_AIC = 420.5

# (dataset, encoding) -> published selection, its fitness metric and value.
PUBLISHED_MODELS = {
    ("wine_white", "standard"): {"terms": WINE_STANDARD_TERMS, "metric": "cv_auc", "value": WINE_STANDARD_CV_AUC},
    ("wine_white", "indexed"): {"terms": WINE_INDEXED_TERMS, "metric": "cv_auc", "value": WINE_INDEXED_CV_AUC},
    ("ctg", "standard"): {"terms": CTG_STANDARD_TERMS, "metric": "aic", "value": CTG_STANDARD_AIC},
    ("ctg", "indexed"): {"terms": CTG_INDEXED_TERMS, "metric": "aic", "value": CTG_INDEXED_AIC},
}

DATASET_URLS = {
    "wine_white": "https://archive.ics.uci.edu/ml/machine-learning-databases/wine-quality/winequality-white.csv",
    "ctg": "https://archive.ics.uci.edu/ml/machine-learning-databases/00193/CTG.xls",
}
CTG_SHEET = "Raw Data"


def builtin_grid_cells() -> list[dict]:
    """Every (n_main, max_length, encoding) cell of the simulated benchmark."""
    return [
        {**row, "encoding": encoding}
        for row in SIMULATION_GRID
        for encoding in BENCH_ENCODINGS
    ]
