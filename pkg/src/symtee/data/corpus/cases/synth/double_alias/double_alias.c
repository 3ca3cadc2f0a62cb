#include <tee_internal_api.h>

void stash_cert(TEE_Param params[4])
{
    char cert[512];
    size_t sz = params[0].memref.size;
    size_t copy_len = sz;

    TEE_MemMove(cert, params[0].memref.buffer, copy_len);
}
