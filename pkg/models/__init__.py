# Polynomial systems, Macaulay matrices and report records
