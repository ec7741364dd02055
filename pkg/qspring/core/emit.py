# ***********************************************************************
# QSPRING REPORT EMISSION
#
# - byte-stable JSON: sorted keys, 12 significant digits, non-finite -> null
# - CSV tables with the same float format
# - structural check of JSON reports against the shipped schema
#
# ***********************************************************************


import csv
import dataclasses
import io
import json
import math
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from qspring.core.exception import QSpringDomainError

SIGNIFICANT_DIGITS = 12
SCHEMA_PATH = os.path.join(os.path.dirname(__file__), 'assets', 'report_schema.json')


def format_float(value: float) -> str:
    return f'{float(value):.{SIGNIFICANT_DIGITS}g}'


def _round(value: float) -> Optional[float]:
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(format_float(value))


def to_jsonable(obj: Any) -> Any:
    '''Converts results, numpy values and dataclasses into plain JSON data
    with floats rounded to the report precision.'''
    if hasattr(obj, 'to_dict'):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable({field.name: getattr(obj, field.name)
                            for field in dataclasses.fields(obj)})
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for (key, value) in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def to_json_text(result: Any) -> str:
    return json.dumps(to_jsonable(result), indent=2, sort_keys=True) + '\n'


def to_csv_text(rows: List[List[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    for row in rows:
        writer.writerow([format_float(value)
                         if isinstance(value, (float, np.floating)) else value
                         for value in row])
    return buffer.getvalue()


def emit(result: Any, fmt: str='json', path: Optional[str]=None) -> None:
    '''Writes a result as JSON or CSV to a file or to standard output.

    :param result: any result object; CSV requires a to_rows() method
    returning the header row followed by data rows
    :param fmt: 'json' or 'csv'
    :param path: output file, or None to print
    '''
    if fmt == 'json':
        text = to_json_text(result)
    elif fmt == 'csv':
        if not hasattr(result, 'to_rows'):
            raise QSpringDomainError(
                f'{type(result).__name__} has no tabular form, use json.', 'format')
        text = to_csv_text(result.to_rows())
    else:
        raise QSpringDomainError(f'expected csv or json, got {fmt}.', 'format')
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, 'w', newline='') as file:
            file.write(text)


# ***********************************************************************
# SCHEMA
#
# ***********************************************************************


_TYPES = {
    'object': dict,
    'array': list,
    'string': str,
    'boolean': bool,
    'integer': int,
    'number': (int, float),
    'null': type(None)
}


def load_schema(path: str=SCHEMA_PATH) -> Dict[str, Any]:
    with open(path, 'r') as file:
        return json.load(file)


def _check_node(value: Any, schema: Dict[str, Any], where: str) -> List[str]:
    errors = []
    kinds = schema.get('type')
    if kinds is not None:
        kinds = [kinds] if isinstance(kinds, str) else kinds
        matched = any(isinstance(value, _TYPES[kind]) and
                      not (kind in ('integer', 'number') and isinstance(value, bool))
                      for kind in kinds)
        if not matched:
            return [f'{where}: expected {kinds}, got {type(value).__name__}']
    if isinstance(value, dict):
        for key in schema.get('required', []):
            if key not in value:
                errors.append(f'{where}: missing key {key}')
        for (key, sub) in schema.get('properties', {}).items():
            if key in value:
                errors += _check_node(value[key], sub, f'{where}.{key}')
    if isinstance(value, list) and 'items' in schema:
        for (i, item) in enumerate(value):
            errors += _check_node(item, schema['items'], f'{where}[{i}]')
    return errors


def check_schema(report: Dict[str, Any], kind: str,
                 schema: Optional[Dict[str, Any]]=None) -> List[str]:
    '''Returns the list of schema violations of a JSON report of the given
    kind (empty when the report conforms).'''
    if schema is None:
        schema = load_schema()
    reports = schema['reports']
    if kind not in reports:
        raise QSpringDomainError(f'expected one of {sorted(reports)}.', 'kind')
    return _check_node(report, reports[kind], kind)
