from ocrkit.items.chart import chart_to_table, validate_pipe_table
from ocrkit.items.formula import MAX_TOKENS, recognize_formula, validate_latex
from ocrkit.items.seal import rectify_seal_text
from ocrkit.items.table import (
    STRUCTURE_VOCAB,
    Frame,
    TableCell,
    TableRoute,
    assemble_table_html,
    check_structure,
    decode_structure,
    order_cells,
    route_table,
)
