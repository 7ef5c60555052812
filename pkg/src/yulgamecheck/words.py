"""256-bit word arithmetic helpers and address conversions."""

WORD_BITS = 256
WORD_MASK = (1 << 256) - 1
SIGN_BIT = 1 << 255
ADDRESS_MASK = (1 << 160) - 1


def wrap(x: int) -> int:
    return x & WORD_MASK


def to_signed(x: int) -> int:
    """Two's-complement reading of a word."""
    return x - (1 << 256) if x & SIGN_BIT else x


def from_signed(x: int) -> int:
    return x & WORD_MASK


def to_address(x: int) -> int:
    """Truncate a word to its low 160 bits."""
    return x & ADDRESS_MASK


def word_bytes(x: int) -> bytes:
    return x.to_bytes(32, "big")


def bytes_word(b: bytes) -> int:
    """Big-endian word from at most 32 bytes (zero-extended on the left)."""
    return int.from_bytes(b, "big")


def format_address(a: int) -> str:
    """Hex rendering used in traces: lowercase, no leading zeros."""
    return hex(a)


def format_word(x: int) -> str:
    """Decimal for small values, hex for hash-sized ones."""
    return hex(x) if x >= 1 << 64 else str(x)
