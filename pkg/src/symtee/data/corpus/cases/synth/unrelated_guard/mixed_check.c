#include <tee_internal_api.h>

TEE_Result import_blob(uint32_t param_types, TEE_Param params[4])
{
    char blob[512];
    uint32_t m = params[1].value.a;

    (void)param_types;
    /* checks the wrong quantity: m is a tag, not the copy length */
    if (m > 512)
        return TEE_ERROR_BAD_PARAMETERS;

    TEE_MemMove(blob, params[0].memref.buffer, params[0].memref.size);
    return TEE_SUCCESS;
}
