# Process exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION_ERROR = 2
EXIT_REFUSAL = 3

# HTTP Status Codes
HTTP_200_OK = 200
HTTP_400_BAD_REQUEST = 400
HTTP_409_CONFLICT = 409
HTTP_413_REQUEST_ENTITY_TOO_LARGE = 413
HTTP_422_UNPROCESSABLE_ENTITY = 422
HTTP_500_INTERNAL_SERVER_ERROR = 500

# Error Messages
PRECISION_EXHAUSTED = "Precision exhausted."
DIVISION_BY_ZERO = "Division by zero."
WRONG_FIELD = "Operation not available for this field."
NOT_A_UNIT = "Element is not a unit."
NOT_IN_SL2 = "Matrix determinant is not 1 at tracked precision."
RADIUS_TOO_LARGE = "Radius exceeds the precision-dependent bound."
DEPTH_EXHAUSTED = "Portrait depth exhausted."
INDEX_OUT_OF_RANGE = "Nielsen move index out of range."
WRONG_ARITY = "Operation requires a tuple of a different length."
REDUCTION_FAILED = "No Nielsen word with an elliptic first entry found within budget."
COMMON_FIXED_VERTEX = "Tuple entries share a fixed vertex."
NO_WITNESS = "No hyperbolic witness found within scan radius."
BUDGET_EXCEEDED = "Computation exceeds the configured budget."
PARSE_ERROR = "Could not parse input."

# Text encodings
ELEMENT_SEPARATOR = "|"
WORD_SEPARATOR = ","
INFINITY_TOKEN = "inf"
