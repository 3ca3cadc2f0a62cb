#include <tee_internal_api.h>

TEE_Result parse_message(uint32_t param_types, TEE_Param params[4])
{
    char hdr[16];
    char body[512];

    (void)param_types;
    if (params[0].memref.size > sizeof(hdr))
        return TEE_ERROR_BAD_PARAMETERS;
    TEE_MemMove(hdr, params[0].memref.buffer, params[0].memref.size);

    TEE_MemMove(body, params[1].memref.buffer, params[1].memref.size);
    return TEE_SUCCESS;
}
