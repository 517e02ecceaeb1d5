from .evaluate import Evaluator, QueryResult, evaluate

__all__ = ["Evaluator", "QueryResult", "evaluate"]
