#include <tee_internal_api.h>

#define CMD_SET_NAME 0
#define CMD_SET_PIN  1

static char g_name[64];

static TEE_Result set_name(uint32_t param_types, TEE_Param params[4])
{
    uint32_t exp_param_types = TEE_PARAM_TYPES(TEE_PARAM_TYPE_MEMREF_INPUT,
                                               TEE_PARAM_TYPE_NONE,
                                               TEE_PARAM_TYPE_NONE,
                                               TEE_PARAM_TYPE_NONE);

    if (param_types != exp_param_types)
        return TEE_ERROR_BAD_PARAMETERS;

    TEE_MemMove(g_name, params[0].memref.buffer, params[0].memref.size);
    return TEE_SUCCESS;
}

static TEE_Result set_pin(uint32_t param_types, TEE_Param params[4])
{
    char pin[8];

    if (param_types != TEE_PARAM_TYPES(TEE_PARAM_TYPE_MEMREF_INPUT, TEE_PARAM_TYPE_NONE,
                                       TEE_PARAM_TYPE_NONE, TEE_PARAM_TYPE_NONE))
        return TEE_ERROR_BAD_PARAMETERS;
    if (params[0].memref.size > sizeof(pin))
        return TEE_ERROR_SHORT_BUFFER;

    TEE_MemMove(pin, params[0].memref.buffer, params[0].memref.size);
    return TEE_SUCCESS;
}

TEE_Result TA_InvokeCommandEntryPoint(void *sess_ctx, uint32_t cmd_id,
                                      uint32_t param_types, TEE_Param params[4])
{
    (void)sess_ctx;
    switch (cmd_id) {
    case CMD_SET_NAME:
        return set_name(param_types, params);
    case CMD_SET_PIN:
        return set_pin(param_types, params);
    default:
        return TEE_ERROR_NOT_SUPPORTED;
    }
}
