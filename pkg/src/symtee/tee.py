"""Names supplied by the GlobalPlatform TEE internal API and the C runtime.

Trusted applications pull these from vendor headers that are never part of
the scanned sources. The parser uses the type names to recognise
declarations, the slicer treats every name here as externally satisfiable,
and the harness synthesizer knows how to stub each of them.
"""

from __future__ import annotations

import re

# Integer typedefs reachable through <klee/klee.h> (it includes stdint/stddef).
STD_TYPES = {
    "size_t": 8, "ssize_t": 8, "uintptr_t": 8, "intptr_t": 8, "ptrdiff_t": 8,
    "uint8_t": 1, "int8_t": 1, "uint16_t": 2, "int16_t": 2,
    "uint32_t": 4, "int32_t": 4, "uint64_t": 8, "int64_t": 8,
    "bool": 1, "_Bool": 1,
}

# GlobalPlatform integer typedefs, with their byte widths.
TEE_INT_TYPES = {
    "TEE_Result": 4,
    "TEEC_Result": 4,
}

# GlobalPlatform opaque handle/struct types the harness stubs as records.
TEE_RECORD_TYPES = {
    "TEE_Param", "TEE_UUID", "TEE_Identity", "TEE_Attribute",
    "TEE_ObjectInfo", "TEE_OperationInfo", "TEE_Time",
}
TEE_HANDLE_TYPES = {
    "TEE_ObjectHandle", "TEE_OperationHandle", "TEE_TASessionHandle",
    "TEE_PropSetHandle",
}

TEE_CONSTANTS = {
    "TEE_SUCCESS": 0x00000000,
    "TEE_ERROR_GENERIC": 0xFFFF0000,
    "TEE_ERROR_ACCESS_DENIED": 0xFFFF0001,
    "TEE_ERROR_CANCEL": 0xFFFF0002,
    "TEE_ERROR_ACCESS_CONFLICT": 0xFFFF0003,
    "TEE_ERROR_EXCESS_DATA": 0xFFFF0004,
    "TEE_ERROR_BAD_FORMAT": 0xFFFF0005,
    "TEE_ERROR_BAD_PARAMETERS": 0xFFFF0006,
    "TEE_ERROR_BAD_STATE": 0xFFFF0007,
    "TEE_ERROR_ITEM_NOT_FOUND": 0xFFFF0008,
    "TEE_ERROR_NOT_IMPLEMENTED": 0xFFFF0009,
    "TEE_ERROR_NOT_SUPPORTED": 0xFFFF000A,
    "TEE_ERROR_NO_DATA": 0xFFFF000B,
    "TEE_ERROR_OUT_OF_MEMORY": 0xFFFF000C,
    "TEE_ERROR_BUSY": 0xFFFF000D,
    "TEE_ERROR_COMMUNICATION": 0xFFFF000E,
    "TEE_ERROR_SECURITY": 0xFFFF000F,
    "TEE_ERROR_SHORT_BUFFER": 0xFFFF0010,
    "TEE_ERROR_OVERFLOW": 0xFFFF300F,
    "TEE_PARAM_TYPE_NONE": 0,
    "TEE_PARAM_TYPE_VALUE_INPUT": 1,
    "TEE_PARAM_TYPE_VALUE_OUTPUT": 2,
    "TEE_PARAM_TYPE_VALUE_INOUT": 3,
    "TEE_PARAM_TYPE_MEMREF_INPUT": 5,
    "TEE_PARAM_TYPE_MEMREF_OUTPUT": 6,
    "TEE_PARAM_TYPE_MEMREF_INOUT": 7,
    "TEE_NUM_PARAMS": 4,
    "TEE_HANDLE_NULL": 0,
    "TEE_MALLOC_FILL_ZERO": 0,
    "NULL": 0,
    "true": 1,
    "false": 0,
}

# Functions known to terminate the trusted application.
ABORT_FUNCTIONS = {"TEE_Panic", "abort", "panic", "exit"}

# Signatures for the no-op stubs of well-known APIs: (return type, parameter list).
# Anything not listed gets a generic K&R-style stub returning zero.
KNOWN_API_SIGNATURES = {
    "TEE_MemMove": ("void", "void* dest, const void* src, size_t n"),
    "TEE_MemFill": ("void", "void* buff, uint32_t x, size_t size"),
    "TEE_MemCompare": ("int32_t", "const void* a, const void* b, size_t size"),
    "TEE_Malloc": ("void*", "size_t size, uint32_t hint"),
    "TEE_Free": ("void", "void* buffer"),
    "TEE_Panic": ("void", "TEE_Result code"),
    "abort": ("void", ""),
    "TEE_PARAM_TYPES": ("uint32_t", "uint32_t t0, uint32_t t1, uint32_t t2, uint32_t t3"),
    "TEE_PARAM_TYPE_GET": ("uint32_t", "uint32_t t, uint32_t i"),
    "memcpy": ("void*", "void* dest, const void* src, size_t n"),
    "memmove": ("void*", "void* dest, const void* src, size_t n"),
    "memset": ("void*", "void* s, int c, size_t n"),
    "strlen": ("size_t", "const char* s"),
    "DMSG": ("void", "const char* fmt, ..."),
    "IMSG": ("void", "const char* fmt, ..."),
    "EMSG": ("void", "const char* fmt, ..."),
    "FMSG": ("void", "const char* fmt, ..."),
    "printf": ("int", "const char* fmt, ..."),
}

# Bodies for stubs whose return value matters to control flow.
KNOWN_API_BODIES = {
    "TEE_PARAM_TYPES": "return t0 | (t1 << 4) | (t2 << 8) | (t3 << 12);",
    "TEE_PARAM_TYPE_GET": "(void)t; (void)i; return 0;",
    "TEE_Panic": "(void)code;\n    klee_silent_exit(0);",
    "abort": "klee_silent_exit(0);",
    "TEE_Malloc": "static char pool[4096];\n    (void)size; (void)hint;\n    return pool;",
}

_TEE_TYPE_RE = re.compile(r"^TEE[C]?_[A-Z][a-z]\w*$")


def is_vendor_type(name: str) -> bool:
    return (name in STD_TYPES or name in TEE_INT_TYPES or name in TEE_RECORD_TYPES
            or name in TEE_HANDLE_TYPES or bool(_TEE_TYPE_RE.match(name)))


def is_vendor_constant(name: str) -> bool:
    return name in TEE_CONSTANTS or name.startswith("TEE_ERROR_") or name.startswith("TEE_PARAM_TYPE_")


def is_vendor_function(name: str) -> bool:
    return name in KNOWN_API_SIGNATURES or name in ABORT_FUNCTIONS or name.startswith("TEE_")


def is_vendor_name(name: str) -> bool:
    return is_vendor_type(name) or is_vendor_constant(name) or is_vendor_function(name)
