#ifndef CAHICHA_CRYPTO_DIGEST_H_
#define CAHICHA_CRYPTO_DIGEST_H_

#include "cahicha/crypto/bytes.h"

namespace cahicha::crypto {

Sha256Digest Sha256(ByteView data);
Sha256Digest HmacSha256(ByteView key, ByteView data);

// Length-aware comparison whose running time does not depend on where the
// inputs first differ.
bool ConstantTimeEquals(ByteView a, ByteView b);

}  // namespace cahicha::crypto

#endif  // CAHICHA_CRYPTO_DIGEST_H_
