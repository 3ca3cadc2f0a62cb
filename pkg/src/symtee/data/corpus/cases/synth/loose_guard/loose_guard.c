#include <tee_internal_api.h>

TEE_Result set_label(uint32_t param_types, TEE_Param params[4])
{
    char label[512];
    size_t label_len = params[0].memref.size;

    (void)param_types;
    /* bound is larger than the destination */
    if (label_len > 1024)
        return TEE_ERROR_SHORT_BUFFER;

    TEE_MemMove(label, params[0].memref.buffer, label_len);
    return TEE_SUCCESS;
}
