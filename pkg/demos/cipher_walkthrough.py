"""Walk through one integrated-key handshake, step by step.

Both parties measure the same distance, bearing and round-trip time, so
both can derive the same 256-bit key without it ever being transmitted.
The receiver rebuilds the first key from the first cipher packet alone,
then evolves it in lockstep with the sender for the rest of the chain.
"""

from sectrack.cipher import (
    SeedPair,
    EnsemblePacket,
    derive_initial_key,
    encrypt_packet,
    decrypt_packet,
    evolve_key,
    first_plain_segment,
    pad,
    reconstruct_initial_key,
    unpad,
)

NODE_ID = 0xA1B2C3D4E5F60718

seeds = SeedPair.from_measurements(
    distance_m=137.4, bearing_deg=221.9, rtt_s=9.2e-7, rtt_bucket=1e-5
)
print("shared measurements quantize to:")
print(f"  distance {seeds.distance_m} m, bearing {seeds.bearing_deg} deg, "
      f"rtt bucket {seeds.rtt_seed}")

messages = [b"hold position", b"mark contact at grid 3-7", b"rotate key now"]
padded = [pad(m) for m in messages]

tx_key = derive_initial_key(seeds, NODE_ID, first_plain_segment(padded[0]))
print(f"\nsender key 1: k1={tx_key.k1:024x}")
print(f"              k2={tx_key.k2:016x} (node identity)")
print(f"              k3={tx_key.k3:024x}")

cipher_packets = []
key = tx_key
for j, plain in enumerate(padded, start=1):
    cipher_packets.append(encrypt_packet(EnsemblePacket(plain, index=j), key))
    key = evolve_key(key, NODE_ID)

print("\ncipher packets:")
for pkt in cipher_packets:
    print(f"  {pkt.index}: {pkt.payload.hex()[:48]}...")

# Receiver side: same seeds, first cipher packet, nothing else.
rx_key = reconstruct_initial_key(cipher_packets[0], seeds, NODE_ID)
print(f"\nreceiver rebuilt key 1 matches sender: {rx_key == tx_key}")

key = rx_key
for pkt in cipher_packets:
    plain = unpad(decrypt_packet(pkt, key).payload)
    print(f"  packet {pkt.index} decrypts to: {plain.decode()}")
    key = evolve_key(key, NODE_ID)

# A receiver whose round-trip measurement fell one bucket off fails.
wrong = SeedPair(seeds.loc_seed, seeds.rtt_seed + 1)
bad_key = reconstruct_initial_key(cipher_packets[0], wrong, NODE_ID)
garbled = decrypt_packet(cipher_packets[0], bad_key).payload
print(f"\noff-by-one rtt bucket garbles the tail segment: "
      f"{garbled[20:32].hex()} != {padded[0][20:32].hex()}")
