#include <tee_internal_api.h>

TEE_Result load_config(uint32_t param_types, TEE_Param params[4])
{
    TEE_Result res = TEE_SUCCESS;
    char cfg[512];
    uint32_t size = params[0].memref.size;

    (void)param_types;
    if (size == 0) {
        res = TEE_ERROR_BAD_PARAMETERS;
        goto out;
    }

    TEE_MemMove(cfg, params[0].memref.buffer, size);

out:
    return res;
}
