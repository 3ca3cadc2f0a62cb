#include <tee_internal_api.h>

typedef unsigned int u32;
typedef unsigned char u8;

#define VAULT_SLOT_BYTES 1024

static u8 vault_slot[VAULT_SLOT_BYTES];

static TEE_Result vault_write(u32 ptypes, TEE_Param p[TEE_NUM_PARAMS])
{
	u32 want = p[1].memref.size;

	(void)ptypes;
	TEE_MemMove(vault_slot, p[1].memref.buffer, want);
	return TEE_SUCCESS;
}
