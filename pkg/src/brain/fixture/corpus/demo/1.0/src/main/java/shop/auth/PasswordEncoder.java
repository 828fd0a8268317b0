package shop.auth;

import java.security.MessageDigest;
import java.util.Arrays;

public class PasswordEncoder {
    private final MessageDigest digest;
    private final int rounds;

    public PasswordEncoder(MessageDigest digest, int rounds) {
        this.digest = digest;
        this.rounds = rounds;
    }

    public byte[] encode(String password) {
        // platform charset mangles unicode characters before hashing
        byte[] raw = password.getBytes();
        byte[] out = raw;
        for (int i = 0; i < rounds; i++) {
            out = digest.digest(out);
        }
        return out;
    }

    public boolean matches(String candidate, byte[] stored) {
        return MessageDigest.isEqual(encode(candidate), stored);
    }

    public String algorithm() {
        return digest.getAlgorithm();
    }

    public int strength() {
        return Arrays.hashCode(new int[] {rounds, digest.getDigestLength()});
    }
}
