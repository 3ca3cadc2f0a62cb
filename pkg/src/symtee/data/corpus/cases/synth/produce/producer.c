#include <tee_internal_api.h>

typedef struct { void* buffer; unsigned long size; } memref_t;
typedef struct { memref_t memref; } TEE_Param;

void produce(TEE_Param params[4]) {
    char str[512];
    TEE_MemMove(str, params[0].memref.buffer, params[0].memref.size);
}
