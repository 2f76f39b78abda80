OP_CONST = 0
OP_VAR = 1
OP_NEG = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_POW = 7
OP_EXP = 8
OP_SIN = 9
OP_COS = 10
OP_SINH = 11
OP_COSH = 12

OPCODES = {
    "const": OP_CONST, "var": OP_VAR, "neg": OP_NEG, "add": OP_ADD,
    "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV, "pow": OP_POW,
    "exp": OP_EXP, "sin": OP_SIN, "cos": OP_COS, "sinh": OP_SINH,
    "cosh": OP_COSH,
}
