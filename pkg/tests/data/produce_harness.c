#include <klee/klee.h>

typedef struct { void* buffer; unsigned long size; } memref_t;
typedef struct { memref_t memref; } TEE_Param;
volatile int g_checked = 0;

void TEE_MemMove(void* dest, const void* src, size_t n) {
    (void)dest; (void)src; (void)n;
    /* Stubbed: do nothing to avoid actual memory side effects */
}

void produce(TEE_Param params[4]) {
    char str[512];
    TEE_MemMove(str, params[0].memref.buffer, params[0].memref.size);
}

int main(void) {
    TEE_Param params[4];

    char buf[4096];
    unsigned long size;
    klee_make_symbolic(&size, sizeof(size), "size");
    klee_assume(size <= 4096UL);

    params[0].memref.buffer = buf;
    params[0].memref.size = size;

    produce(params);

    if (size > 512UL) {
        klee_assert(g_checked && "Missing input validation");
    }
    return 0;
}
